#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "actsim/formula.hpp"
#include "actsim/network.hpp"

namespace actsim::check {

/// Finite ranges for one component's state variables.
struct ComponentConstraint {
  std::string component;
  std::vector<devs::VariableDomain> domains;  // every hi is set
};

struct Constraints {
  std::vector<ComponentConstraint> components;
  /// Entry times below the horizon are part of the state; at or past it
  /// states fold by normalized residuals.
  std::optional<Time> horizon;
  /// Branch on both confluent orders at every coincidence.
  bool explore_confluent = false;
  std::size_t node_budget = 1'000'000;
};

/// Raised when a model cannot be constrained (e.g. an unbounded generator).
class UnconstrainedModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the graph outgrows the node budget.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(std::size_t nodes, std::size_t edges, std::size_t frontier, std::size_t budget);
  std::size_t nodes() const { return nodes_; }
  std::size_t edges() const { return edges_; }
  std::size_t frontier() const { return frontier_; }

 private:
  std::size_t nodes_;
  std::size_t edges_;
  std::size_t frontier_;
};

/// Declared domains of every component; declared-unbounded variables get
/// the total number of jobs the generators can emit. Throws
/// UnconstrainedModel for generators without a finite count.
Constraints derive_constraints(const devs::CoupledSpec& spec,
                               std::optional<Time> horizon = std::nullopt,
                               bool explore_confluent = false);

enum class NodeClass { live, quiescent_safe, deadlock, constraint_violation };

std::string_view to_string(NodeClass c);

struct ReachNode {
  /// Rebased: every `last` equals `time`, every sigma is a residual.
  devs::NetworkState state;
  Time time;
  /// Time until the next event; infinity for passive states.
  Time dwell;
  NodeClass cls = NodeClass::live;
  std::string violation;
  /// BFS tree edge (index into edges), absent for the initial node.
  std::optional<std::size_t> parent_edge;
};

struct ReachEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  Time dwell;
  std::string label;
  /// Choice script that reproduces this step.
  std::vector<std::size_t> choices;
};

class ReachGraph {
 public:
  ReachGraph(std::shared_ptr<const devs::CoupledSpec> spec, Constraints constraints);

  const devs::Network& network() const { return net_; }
  const Constraints& constraints() const { return constraints_; }
  const std::vector<ReachNode>& nodes() const { return nodes_; }
  const std::vector<ReachEdge>& edges() const { return edges_; }
  const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }
  std::size_t initial() const { return 0; }

  /// Graph node of a rebased network state at time `t`, if any.
  std::optional<std::size_t> lookup(const devs::NetworkState& rebased, Time t) const;
  std::string key(const devs::NetworkState& rebased, Time t) const;

  /// Edge indices from the initial node to `node` along the BFS tree.
  std::vector<std::size_t> path_to(std::size_t node) const;

  std::size_t count(NodeClass c) const;

 private:
  void build();
  std::size_t intern(devs::NetworkState state, Time t, bool& fresh);
  std::string check_domains(const devs::NetworkState& state) const;

  devs::Network net_;
  Constraints constraints_;
  std::vector<ReachNode> nodes_;
  std::vector<ReachEdge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Builds the reachability graph of `spec` under `constraints`.
ReachGraph build_reach_graph(const devs::CoupledSpec& spec, const Constraints& constraints);

struct ComponentPhase {
  std::string component;
  std::string phase;
};

struct WitnessStep {
  Time time;
  std::vector<ComponentPhase> phases;
  /// Transition that led here; empty for the initial state.
  std::string via;
};

struct Verdict {
  std::string name;
  std::string formula;
  bool satisfied = true;
  std::vector<WitnessStep> witness;
  /// Index of the violating node and the instant of violation.
  std::optional<std::size_t> node;
  Time at;
  /// Per-step choice scripts replaying the witness.
  std::vector<std::vector<std::size_t>> choices;
};

/// Checks that the property's body holds at every instant of every
/// reachable state. Clock atoms require a horizon above every constant.
Verdict check(const ReachGraph& graph, const Property& property, TickScale scale = 1);

/// Throws std::invalid_argument if the property references an unknown
/// component/phase or needs a horizon the graph lacks.
void validate_property(const ReachGraph& graph, const Property& property);

struct DeadlockReport {
  std::size_t node = 0;
  Time time;
  std::vector<WitnessStep> witness;
  std::vector<std::vector<std::size_t>> choices;
};

/// All deadlock sinks with shortest witness paths.
std::vector<DeadlockReport> detect_deadlock(const ReachGraph& graph);

struct ReplayResult {
  bool ok = false;
  std::string message;
  devs::NetworkState final_state;
};

/// Re-executes a witness on the simulator, checking every intermediate
/// state against the graph. With `expect_deadlock` the final state must be
/// passive with a non-accepting component.
ReplayResult replay_witness(const ReachGraph& graph, std::size_t target, bool expect_deadlock);

struct ContainmentResult {
  bool contained = false;
  std::size_t steps = 0;
  std::string message;
};

/// Simulates with `seed` and checks that each visited state is a graph node
/// reached from its predecessor by a graph edge.
ContainmentResult simulation_containment(const ReachGraph& graph, Time t_end,
                                         std::uint64_t seed = 0);

/// Evaluates the property over one simulated trajectory with the same
/// instant semantics as `check`.
struct TraceVerdict {
  bool satisfied = true;
  Time at;
  std::string detail;
};

TraceVerdict evaluate_on_trace(const devs::CoupledSpec& spec, const Property& property, Time t_end,
                               std::uint64_t seed = 0);

struct CrossReport {
  std::string name;
  bool checker_satisfied = true;
  bool trace_satisfied = true;
  bool agree = true;
  std::string divergence;
};

/// Compares the checker's verdict with the trace evaluation. Rejects
/// models with unseeded random choices unless `seed` is given.
CrossReport cross_validate(const devs::CoupledSpec& spec, const Property& property,
                           const Constraints& constraints, Time t_end,
                           std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace actsim::check
