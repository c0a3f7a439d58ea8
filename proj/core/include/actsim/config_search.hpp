#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "actsim/activity.hpp"
#include "actsim/checker.hpp"
#include "actsim/synthesis.hpp"

namespace actsim::search {

/// initial -> gen -> fork -> {a1, a2} -> join -> final. Durations and the
/// period are in model time units.
activity::Activity divide_conquer_activity(std::uint64_t period, std::uint64_t t1,
                                           std::uint64_t t2, std::optional<std::uint64_t> count);

/// AG (not deadlock).
check::Property no_deadlock_property();
/// AG (clock > c -> a2.phase == busy).
check::Property busy_after_property(std::uint64_t c = 5);

struct Scenario {
  std::uint64_t period = 5;
  std::uint64_t t1 = 1;
  std::vector<std::uint64_t> t2_values = {4, 5, 6};
  std::uint64_t count = 8;
  std::uint64_t horizon = 60;
  std::uint64_t clock_constant = 5;
};

/// Expected verdicts: rows are {no deadlock, busy after c}; columns follow
/// Scenario::t2_values. true = Satisfied.
struct VerdictTable {
  std::vector<std::array<bool, 2>> columns;
};

/// Satisfied / Not / Not for no-deadlock and Not / Not / Satisfied for
/// busy-after over t2 = 4, 5, 6.
VerdictTable reference_table();

struct LatticePoint {
  std::uint64_t capacity = 0;
  devs::Overflow overflow = devs::Overflow::drop;
  devs::ConfluentOrder confluent = devs::ConfluentOrder::ext_then_int;
  OverflowSite site = OverflowSite::action;

  SemanticsConfig semantics() const;
  std::string to_string() const;
};

std::vector<LatticePoint> semantics_lattice();

struct Cell {
  std::uint64_t t2 = 0;
  std::size_t row = 0;
  bool expected = false;
  bool actual = false;
  std::size_t graph_nodes = 0;
  bool match() const { return expected == actual; }
};

struct ConfigScore {
  LatticePoint config;
  std::vector<Cell> cells;
  std::size_t score = 0;
  /// Row index -> every cell of that row matches.
  std::array<bool, 2> row_perfect{};
};

struct SearchReport {
  std::vector<ConfigScore> ranked;
  std::size_t max_score = 0;
  std::size_t cells = 0;
};

/// Builds and checks every lattice point against every scenario column and
/// ranks configurations by matching cells (ties keep lattice order).
SearchReport config_search(const Scenario& scenario, const VerdictTable& expected);

std::string report_json(const SearchReport& report, const Scenario& scenario);

}  // namespace actsim::search
