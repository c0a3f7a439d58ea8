#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "actsim/activity.hpp"
#include "actsim/devs.hpp"
#include "actsim/templates.hpp"

namespace actsim {

/// Which components a capacity/overflow override applies to.
enum class OverflowSite { action, join, both };

std::string_view to_string(OverflowSite site);
std::optional<OverflowSite> overflow_site_from_string(std::string_view text);

/// Semantic choices the activity notation leaves open. Overrides replace
/// node parameters on every component at `site`; the confluent override
/// applies to all components.
struct SemanticsConfig {
  devs::ConfluentOrder default_confluent = devs::ConfluentOrder::ext_then_int;
  std::optional<devs::ConfluentOrder> confluent;
  std::optional<std::uint64_t> capacity;
  std::optional<devs::Overflow> overflow;
  OverflowSite site = OverflowSite::action;
  /// Delay of control nodes without an explicit `delay` parameter.
  Time control_delay = Time::zero();
  TickScale tick_scale = 1;
};

class SynthesisError : public std::invalid_argument {
 public:
  SynthesisError(std::string node, const std::string& message);
  const std::string& node() const { return node_; }

 private:
  std::string node_;
};

/// Output port a node uses for the edge towards `target`.
std::string source_port(const activity::ActivityNode& node, const std::string& target);
/// Input port a node uses for the edge from `source`.
std::string target_port(const activity::ActivityNode& node, const std::string& source);

/// Maps a flat activity to a coupled model: one component per node except
/// initial nodes, finals become sinks, one coupling per edge not leaving an
/// initial node. Component names equal node labels.
devs::CoupledSpec synthesize(const activity::Activity& flat, const SemanticsConfig& config = {});

/// Validates, flattens and synthesizes. Throws std::invalid_argument with
/// the first error diagnostic when the model is not well-formed.
devs::CoupledSpec synthesize_model(const activity::ActivityModel& model,
                                   const SemanticsConfig& config = {});

/// Versioned JSON rendering of a coupled model (schema actsim-coupled-v1).
std::string export_json(const devs::CoupledSpec& spec, TickScale scale = 1);

}  // namespace actsim
