#include "actsim/checker.hpp"

#include <algorithm>

#include "actsim/simulator.hpp"
#include "actsim/templates.hpp"

namespace actsim::check {

using devs::NetworkState;

ResourceError::ResourceError(std::size_t nodes, std::size_t edges, std::size_t frontier,
                             std::size_t budget)
    : std::runtime_error("reachability graph exceeds the node budget of " +
                         std::to_string(budget) + " (nodes=" + std::to_string(nodes) +
                         ", edges=" + std::to_string(edges) +
                         ", unexpanded=" + std::to_string(frontier) + ")"),
      nodes_(nodes),
      edges_(edges),
      frontier_(frontier) {}

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::live: return "live";
    case NodeClass::quiescent_safe: return "quiescent-safe";
    case NodeClass::deadlock: return "deadlock";
    case NodeClass::constraint_violation: return "constraint-violation";
  }
  return "live";
}

Constraints derive_constraints(const devs::CoupledSpec& spec, std::optional<Time> horizon,
                               bool explore_confluent) {
  std::uint64_t total = 0;
  for (const auto& c : spec.components) {
    const auto* gen = dynamic_cast<const devs::GeneratorModel*>(c.model.get());
    if (gen == nullptr) continue;
    if (!gen->params().count) {
      throw UnconstrainedModel("generator '" + c.name +
                               "' has no finite count; set count=N to verify this model");
    }
    total += *gen->params().count;
  }
  Constraints out;
  out.horizon = horizon;
  out.explore_confluent = explore_confluent;
  for (const auto& c : spec.components) {
    ComponentConstraint cc{c.name, c.model->variable_domains()};
    for (auto& d : cc.domains) {
      if (!d.hi) d.hi = static_cast<std::int64_t>(total);
    }
    out.components.push_back(std::move(cc));
  }
  return out;
}

namespace {

NetworkState from_snapshot(const devs::Snapshot& snap) {
  NetworkState ns;
  ns.states = snap.states;
  ns.last.assign(ns.states.size(), snap.time);
  ns.now = snap.time;
  return ns;
}

Time min_residual(const NetworkState& ns) {
  Time best = Time::infinity();
  for (const auto& s : ns.states) best = std::min(best, s.sigma);
  return best;
}

std::string describe(const devs::Network& net, const devs::StepOutcome& o) {
  std::string out;
  for (const auto& tr : o.transitions) {
    if (!out.empty()) out += ", ";
    out += net.spec().components[tr.component].name + " " + std::string(devs::to_string(tr.kind)) +
           " " + tr.phase_before + "->" + tr.phase_after;
    if (!tr.outputs.empty()) out += " !" + tr.outputs.to_string();
  }
  return out;
}

// Instants that represent every distinct valuation of the clock atoms over
// the dwell interval [t, t + dwell): the entry instant itself plus, for each
// constant c inside the interval, the open stretch just after c.
std::vector<std::pair<Time, bool>> instants(Time t, Time dwell, const std::vector<Time>& constants) {
  std::vector<std::pair<Time, bool>> out{{t, false}};
  Time end = t + dwell;
  for (Time c : constants) {
    if (c >= t && c < end) out.emplace_back(c, true);
  }
  return out;
}

class Evaluator {
 public:
  explicit Evaluator(const devs::Network& net) : net_(net) {}

  bool eval(const Expr& e, const NetworkState& ns, bool deadlock, Time v, bool plus) const {
    switch (e.kind) {
      case Expr::Kind::deadlock: return deadlock;
      case Expr::Kind::clock_gt: return plus ? v >= e.constant : v > e.constant;
      case Expr::Kind::phase_eq: {
        auto i = net_.spec().index_of(e.component);
        return i && net_.model(*i).in_phase(ns.states[*i], e.phase);
      }
      case Expr::Kind::negation: return !eval(e.args[0], ns, deadlock, v, plus);
      case Expr::Kind::implies:
        return !eval(e.args[0], ns, deadlock, v, plus) || eval(e.args[1], ns, deadlock, v, plus);
    }
    return false;
  }

  /// First instant in the state's interval at which `e` is false.
  std::optional<Time> first_violation(const Expr& e, const NetworkState& ns, bool deadlock, Time t,
                                      Time dwell, const std::vector<Time>& constants) const {
    for (auto [v, plus] : instants(t, dwell, constants)) {
      if (!eval(e, ns, deadlock, v, plus)) return v;
    }
    return std::nullopt;
  }

 private:
  const devs::Network& net_;
};

void check_atoms(const devs::Network& net, const Expr& e) {
  if (e.kind == Expr::Kind::phase_eq) {
    auto i = net.spec().index_of(e.component);
    if (!i) throw std::invalid_argument("unknown component '" + e.component + "'");
    auto phases = net.model(*i).phases();
    if (std::find(phases.begin(), phases.end(), e.phase) == phases.end()) {
      std::string known;
      for (const auto& p : phases) known += (known.empty() ? "" : ", ") + p;
      throw std::invalid_argument("component '" + e.component + "' has no phase '" + e.phase +
                                  "' (phases: " + known + ")");
    }
  }
  for (const auto& a : e.args) check_atoms(net, a);
}

std::vector<WitnessStep> witness_for(const ReachGraph& g, std::size_t node,
                                     std::vector<std::vector<std::size_t>>* choices) {
  auto snapshot = [&](std::size_t i, std::string via) {
    WitnessStep step{g.nodes()[i].time, {}, std::move(via)};
    const auto& spec = g.network().spec();
    for (std::size_t k = 0; k < spec.components.size(); ++k) {
      step.phases.push_back({spec.components[k].name, g.nodes()[i].state.states[k].phase});
    }
    return step;
  };
  std::vector<WitnessStep> out{snapshot(g.initial(), "")};
  for (std::size_t e : g.path_to(node)) {
    const auto& edge = g.edges()[e];
    out.push_back(snapshot(edge.to, edge.label));
    if (choices != nullptr) choices->push_back(edge.choices);
  }
  return out;
}

}  // namespace

ReachGraph::ReachGraph(std::shared_ptr<const devs::CoupledSpec> spec, Constraints constraints)
    : net_(std::move(spec)), constraints_(std::move(constraints)) {
  build();
}

std::string ReachGraph::key(const NetworkState& rebased, Time t) const {
  if (constraints_.horizon && t < *constraints_.horizon) {
    return "T" + std::to_string(t.ticks()) + "|" + devs::state_key(net_, rebased, Time::zero());
  }
  Time offset = min_residual(rebased);
  return devs::state_key(net_, rebased, offset.is_infinite() ? Time::zero() : offset);
}

std::optional<std::size_t> ReachGraph::lookup(const NetworkState& rebased, Time t) const {
  auto it = index_.find(key(rebased, t));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string ReachGraph::check_domains(const NetworkState& state) const {
  const auto& spec = net_.spec();
  for (const auto& cc : constraints_.components) {
    auto i = spec.index_of(cc.component);
    if (!i) continue;
    auto values = net_.model(*i).variable_values(state.states[*i]);
    for (std::size_t k = 0; k < cc.domains.size() && k < values.size(); ++k) {
      if (!cc.domains[k].contains(values[k])) {
        return cc.component + "." + cc.domains[k].name + "=" + std::to_string(values[k]) +
               " outside " + std::to_string(cc.domains[k].lo) + ".." +
               (cc.domains[k].hi ? std::to_string(*cc.domains[k].hi) : std::string("inf"));
      }
    }
  }
  return {};
}

std::size_t ReachGraph::intern(NetworkState state, Time t, bool& fresh) {
  std::string k = key(state, t);
  auto it = index_.find(k);
  if (it != index_.end()) {
    fresh = false;
    return it->second;
  }
  if (nodes_.size() >= constraints_.node_budget) {
    std::size_t unexpanded = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (out_[i].empty() && nodes_[i].cls == NodeClass::live) ++unexpanded;
    }
    throw ResourceError(nodes_.size(), edges_.size(), unexpanded, constraints_.node_budget);
  }
  fresh = true;
  ReachNode node;
  node.time = t;
  node.dwell = min_residual(state);
  node.violation = check_domains(state);
  if (!node.violation.empty()) {
    node.cls = NodeClass::constraint_violation;
  } else if (node.dwell.is_infinite()) {
    node.cls = net_.all_accepting(state) ? NodeClass::quiescent_safe : NodeClass::deadlock;
  }
  node.state = std::move(state);
  nodes_.push_back(std::move(node));
  out_.emplace_back();
  std::size_t id = nodes_.size() - 1;
  index_.emplace(std::move(k), id);
  return id;
}

void ReachGraph::build() {
  bool fresh = false;
  intern(net_.initial_state(), Time::zero(), fresh);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].cls != NodeClass::live) continue;
    const Time dwell = nodes_[i].dwell;
    const Time t_next = nodes_[i].time + dwell;
    std::vector<std::size_t> script;
    while (true) {
      devs::ScriptedChoices choices(script, constraints_.explore_confluent);
      NetworkState next = nodes_[i].state;
      devs::StepOutcome outcome = net_.step(next, t_next, devs::Bag{}, choices, t_next);
      net_.rebase(next);
      std::size_t j = intern(std::move(next), t_next, fresh);
      bool duplicate = std::any_of(out_[i].begin(), out_[i].end(),
                                   [&](std::size_t e) { return edges_[e].to == j; });
      if (!duplicate) {
        edges_.push_back({i, j, dwell, describe(net_, outcome), choices.taken()});
        out_[i].push_back(edges_.size() - 1);
        if (fresh) nodes_[j].parent_edge = edges_.size() - 1;
      }

      const auto& taken = choices.taken();
      const auto& arity = choices.arities();
      std::optional<std::size_t> pivot;
      for (std::size_t k = taken.size(); k-- > 0;) {
        if (taken[k] + 1 < arity[k]) {
          pivot = k;
          break;
        }
      }
      if (!pivot) break;
      script.assign(taken.begin(), taken.begin() + static_cast<std::ptrdiff_t>(*pivot));
      script.push_back(taken[*pivot] + 1);
    }
  }
}

std::vector<std::size_t> ReachGraph::path_to(std::size_t node) const {
  std::vector<std::size_t> path;
  while (nodes_[node].parent_edge) {
    std::size_t e = *nodes_[node].parent_edge;
    path.push_back(e);
    node = edges_[e].from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::size_t ReachGraph::count(NodeClass c) const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                [&](const ReachNode& n) { return n.cls == c; }));
}

ReachGraph build_reach_graph(const devs::CoupledSpec& spec, const Constraints& constraints) {
  return ReachGraph(std::make_shared<const devs::CoupledSpec>(spec), constraints);
}

void validate_property(const ReachGraph& graph, const Property& property) {
  check_atoms(graph.network(), property.body);
  auto constants = clock_constants(property.body);
  if (constants.empty()) return;
  const auto& horizon = graph.constraints().horizon;
  if (!horizon || *horizon <= constants.back()) {
    throw std::invalid_argument("property '" + property.name + "' compares the clock with " +
                                format_time(constants.back()) +
                                "; build the graph with a horizon above that constant");
  }
}

Verdict check(const ReachGraph& graph, const Property& property, TickScale scale) {
  validate_property(graph, property);
  Verdict v;
  v.name = property.name;
  v.formula = to_string(property, scale);
  const auto constants = clock_constants(property.body);
  Evaluator ev(graph.network());
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const auto& n = graph.nodes()[i];
    auto bad = ev.first_violation(property.body, n.state, n.cls == NodeClass::deadlock, n.time,
                                  n.dwell, constants);
    if (!bad) continue;
    v.satisfied = false;
    v.node = i;
    v.at = *bad;
    v.witness = witness_for(graph, i, &v.choices);
    return v;
  }
  return v;
}

std::vector<DeadlockReport> detect_deadlock(const ReachGraph& graph) {
  std::vector<DeadlockReport> out;
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    if (graph.nodes()[i].cls != NodeClass::deadlock) continue;
    DeadlockReport r;
    r.node = i;
    r.time = graph.nodes()[i].time;
    r.witness = witness_for(graph, i, &r.choices);
    out.push_back(std::move(r));
  }
  return out;
}

ReplayResult replay_witness(const ReachGraph& graph, std::size_t target, bool expect_deadlock) {
  ReplayResult result;
  devs::Simulator sim(graph.network().spec_ptr(), {.seed = 0, .record_trace = false});
  std::size_t step = 0;
  for (std::size_t e : graph.path_to(target)) {
    const auto& edge = graph.edges()[e];
    const auto& to = graph.nodes()[edge.to];
    if (sim.next_event_time() != to.time) {
      result.message = "step " + std::to_string(step) + ": simulator event at " +
                       format_time(sim.next_event_time()) + ", witness expects " +
                       format_time(to.time);
      return result;
    }
    devs::ScriptedChoices choices(edge.choices, graph.constraints().explore_confluent);
    sim.step(choices);
    NetworkState ns = from_snapshot(sim.snapshot());
    if (graph.key(ns, ns.now) != graph.key(to.state, to.time)) {
      result.message = "step " + std::to_string(step) + ": simulator state differs at t=" +
                       format_time(ns.now);
      return result;
    }
    ++step;
  }
  result.final_state = from_snapshot(sim.snapshot());
  if (expect_deadlock) {
    if (sim.next_event_time().is_finite()) {
      result.message = "replayed state is not passive";
      return result;
    }
    if (graph.network().all_accepting(result.final_state)) {
      result.message = "replayed state has every component accepting";
      return result;
    }
  }
  result.ok = true;
  result.message = "replayed " + std::to_string(step) + " steps";
  return result;
}

ContainmentResult simulation_containment(const ReachGraph& graph, Time t_end, std::uint64_t seed) {
  ContainmentResult r;
  devs::Simulator sim(graph.network().spec_ptr(), {.seed = seed, .record_trace = false});
  auto current = graph.lookup(from_snapshot(sim.snapshot()), Time::zero());
  if (!current) {
    r.message = "initial state is not a graph node";
    return r;
  }
  while (true) {
    Time t = sim.next_event_time();
    if (t.is_infinite() || t > t_end) break;
    sim.step();
    NetworkState ns = from_snapshot(sim.snapshot());
    auto next = graph.lookup(ns, ns.now);
    if (!next) {
      r.message = "state at t=" + format_time(ns.now) + " (step " + std::to_string(r.steps + 1) +
                  ") is not a graph node";
      return r;
    }
    const auto& out = graph.out_edges(*current);
    bool linked = std::any_of(out.begin(), out.end(),
                              [&](std::size_t e) { return graph.edges()[e].to == *next; });
    if (!linked) {
      r.message = "no graph edge for the step at t=" + format_time(ns.now);
      return r;
    }
    current = next;
    ++r.steps;
  }
  r.contained = true;
  r.message = "all " + std::to_string(r.steps) + " steps are graph edges";
  return r;
}

TraceVerdict evaluate_on_trace(const devs::CoupledSpec& spec, const Property& property, Time t_end,
                               std::uint64_t seed) {
  auto shared = std::make_shared<const devs::CoupledSpec>(spec);
  devs::Simulator sim(shared, {.seed = seed, .record_trace = false});
  check_atoms(sim.network(), property.body);
  const auto constants = clock_constants(property.body);
  Evaluator ev(sim.network());
  TraceVerdict out;
  while (true) {
    NetworkState ns = from_snapshot(sim.snapshot());
    Time next = sim.next_event_time();
    Time dwell = next - ns.now;
    bool deadlock = next.is_infinite() && !sim.network().all_accepting(ns);
    if (auto bad = ev.first_violation(property.body, ns, deadlock, ns.now, dwell, constants)) {
      out.satisfied = false;
      out.at = *bad;
      out.detail = "violated at t=" + format_time(*bad);
      return out;
    }
    if (next.is_infinite() || next > t_end) break;
    sim.step();
  }
  out.detail = "holds up to t=" + format_time(t_end);
  return out;
}

CrossReport cross_validate(const devs::CoupledSpec& spec, const Property& property,
                           const Constraints& constraints, Time t_end,
                           std::optional<std::uint64_t> seed) {
  if (spec.nondeterministic() && !seed) {
    throw std::invalid_argument(
        "model has random choices without a fixed seed; pass a seed to cross-validate");
  }
  ReachGraph graph = build_reach_graph(spec, constraints);
  Verdict v = check(graph, property);
  TraceVerdict tv = evaluate_on_trace(spec, property, t_end, seed.value_or(0));
  CrossReport r;
  r.name = property.name;
  r.checker_satisfied = v.satisfied;
  r.trace_satisfied = tv.satisfied;
  r.agree = v.satisfied == tv.satisfied;
  if (!r.agree) {
    r.divergence = v.satisfied ? "checker satisfied, trace " + tv.detail
                               : "checker violated at t=" + format_time(v.at) + ", trace " +
                                     tv.detail;
  }
  return r;
}

}  // namespace actsim::check
