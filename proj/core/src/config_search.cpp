#include "actsim/config_search.hpp"

#include <algorithm>
#include <json.hpp>

namespace actsim::search {

using activity::ActivityNode;
using activity::NodeKind;
using activity::ParamValue;

activity::Activity divide_conquer_activity(std::uint64_t period, std::uint64_t t1,
                                           std::uint64_t t2, std::optional<std::uint64_t> count) {
  auto node = [](std::string label, NodeKind kind,
                 std::map<std::string, ParamValue> params = {}) {
    ActivityNode n;
    n.label = std::move(label);
    n.kind = kind;
    n.params = std::move(params);
    return n;
  };
  auto num = [](std::uint64_t v) { return ParamValue::number(std::to_string(v)); };

  activity::Activity a;
  a.name = "DivideConquer";
  std::map<std::string, ParamValue> gen{{"period", num(period)}};
  if (count) gen["count"] = num(*count);
  a.nodes = {node("start", NodeKind::initial),
             node("gen", NodeKind::generator, gen),
             node("fork", NodeKind::fork),
             node("a1", NodeKind::action, {{"duration", num(t1)}}),
             node("a2", NodeKind::action, {{"duration", num(t2)}}),
             node("join", NodeKind::join),
             node("end", NodeKind::final)};
  a.edges = {{"start", "gen", {}}, {"gen", "fork", {}}, {"fork", "a1", {}}, {"fork", "a2", {}},
             {"a1", "join", {}},   {"a2", "join", {}},  {"join", "end", {}}};
  return a;
}

check::Property no_deadlock_property() {
  return {"noDeadlock", check::Expr::negate(check::Expr::deadlock())};
}

check::Property busy_after_property(std::uint64_t c) {
  return {"busyAfter" + std::to_string(c),
          check::Expr::implies(check::Expr::clock_gt(Time(c)),
                               check::Expr::phase_eq("a2", "busy"))};
}

VerdictTable reference_table() { return {{{true, false}, {false, false}, {false, true}}}; }

SemanticsConfig LatticePoint::semantics() const {
  SemanticsConfig c;
  c.capacity = capacity;
  c.overflow = overflow;
  c.confluent = confluent;
  c.site = site;
  return c;
}

std::string LatticePoint::to_string() const {
  return "capacity=" + std::to_string(capacity) + " overflow=" + std::string(devs::to_string(overflow)) +
         " confluent=" + std::string(devs::to_string(confluent)) +
         " site=" + std::string(actsim::to_string(site));
}

std::vector<LatticePoint> semantics_lattice() {
  std::vector<LatticePoint> out;
  for (std::uint64_t cap = 0; cap <= 2; ++cap) {
    for (auto ov : {devs::Overflow::drop, devs::Overflow::stuck}) {
      for (auto co : {devs::ConfluentOrder::ext_then_int, devs::ConfluentOrder::int_then_ext}) {
        for (auto site : {OverflowSite::action, OverflowSite::join, OverflowSite::both}) {
          out.push_back({cap, ov, co, site});
        }
      }
    }
  }
  return out;
}

SearchReport config_search(const Scenario& scenario, const VerdictTable& expected) {
  if (expected.columns.size() != scenario.t2_values.size()) {
    throw std::invalid_argument("expected table has " + std::to_string(expected.columns.size()) +
                                " columns for " + std::to_string(scenario.t2_values.size()) +
                                " scenarios");
  }
  const check::Property rows[2] = {no_deadlock_property(),
                                   busy_after_property(scenario.clock_constant)};
  SearchReport report;
  report.cells = 2 * scenario.t2_values.size();
  for (const auto& point : semantics_lattice()) {
    ConfigScore score;
    score.config = point;
    score.row_perfect = {true, true};
    for (std::size_t col = 0; col < scenario.t2_values.size(); ++col) {
      std::uint64_t t2 = scenario.t2_values[col];
      auto spec = synthesize(
          divide_conquer_activity(scenario.period, scenario.t1, t2, scenario.count),
          point.semantics());
      auto constraints = check::derive_constraints(spec, Time(scenario.horizon));
      auto graph = check::build_reach_graph(spec, constraints);
      for (std::size_t row = 0; row < 2; ++row) {
        Cell cell{t2, row, expected.columns[col][row], check::check(graph, rows[row]).satisfied,
                  graph.nodes().size()};
        if (cell.match()) {
          ++score.score;
        } else {
          score.row_perfect[row] = false;
        }
        score.cells.push_back(cell);
      }
    }
    report.max_score = std::max(report.max_score, score.score);
    report.ranked.push_back(std::move(score));
  }
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const ConfigScore& a, const ConfigScore& b) { return a.score > b.score; });
  return report;
}

std::string report_json(const SearchReport& report, const Scenario& scenario) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["scenario"] = {{"period", scenario.period},
                     {"t1", scenario.t1},
                     {"t2", scenario.t2_values},
                     {"count", scenario.count},
                     {"horizon", scenario.horizon},
                     {"formulae",
                      {check::to_string(no_deadlock_property()),
                       check::to_string(busy_after_property(scenario.clock_constant))}}};
  doc["cells"] = report.cells;
  doc["max_score"] = report.max_score;
  ordered_json ranked = ordered_json::array();
  for (const auto& s : report.ranked) {
    ordered_json cells = ordered_json::array();
    for (const auto& c : s.cells) {
      cells.push_back({{"t2", c.t2},
                       {"row", c.row},
                       {"expected", c.expected ? "Satisfied" : "Not satisfied"},
                       {"actual", c.actual ? "Satisfied" : "Not satisfied"},
                       {"match", c.match()},
                       {"graph_nodes", c.graph_nodes}});
    }
    ranked.push_back({{"capacity", s.config.capacity},
                      {"overflow", devs::to_string(s.config.overflow)},
                      {"confluent", devs::to_string(s.config.confluent)},
                      {"site", to_string(s.config.site)},
                      {"score", s.score},
                      {"row_perfect", {s.row_perfect[0], s.row_perfect[1]}},
                      {"cells", std::move(cells)}});
  }
  doc["ranked"] = std::move(ranked);
  return doc.dump(2) + "\n";
}

}  // namespace actsim::search
