#include "actsim/network.hpp"

#include <algorithm>

namespace actsim::devs {

std::size_t SeededChoices::choose(std::size_t n, std::size_t component,
                                  std::optional<std::uint64_t> seed) {
  if (n <= 1) return 0;
  auto it = engines_.find(component);
  if (it == engines_.end()) {
    std::seed_seq seq{seed.value_or(seed_), static_cast<std::uint64_t>(component)};
    it = engines_.emplace(component, std::mt19937_64(seq)).first;
  }
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(it->second);
}

std::size_t ScriptedChoices::choose(std::size_t n, std::size_t, std::optional<std::uint64_t>) {
  std::size_t pick = taken_.size() < script_.size() ? script_[taken_.size()] : 0;
  if (pick >= n) pick = 0;
  taken_.push_back(pick);
  arities_.push_back(n);
  return pick;
}

std::string_view to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::internal: return "internal";
    case TransitionKind::external: return "external";
    case TransitionKind::confluent: return "confluent";
  }
  return "internal";
}

namespace {

std::string route_key(std::optional<std::size_t> source, const std::string& port) {
  return (source ? std::to_string(*source) : std::string("#")) + ":" + port;
}

class StepContext final : public TransitionContext {
 public:
  StepContext(Time absolute, ChoiceSource& choices, const CoupledSpec& spec,
              std::vector<Note>& notes)
      : absolute_(absolute), choices_(choices), spec_(spec), notes_(notes) {}

  void set_component(std::size_t i) { component_ = i; }

  Time now() const override { return absolute_; }
  std::size_t random_choice(std::size_t n, std::optional<std::uint64_t> seed) override {
    return choices_.choose(n, component_, seed);
  }
  void note(std::string kind, std::string message) override {
    notes_.push_back({absolute_, spec_.components[component_].name, std::move(kind),
                      std::move(message)});
  }

 private:
  Time absolute_;
  ChoiceSource& choices_;
  const CoupledSpec& spec_;
  std::vector<Note>& notes_;
  std::size_t component_ = 0;
};

}  // namespace

Network::Network(std::shared_ptr<const CoupledSpec> spec) : spec_(std::move(spec)) {
  validate_coupled(*spec_);
  for (const auto& k : spec_->couplings) {
    std::optional<std::size_t> source;
    if (!k.from.component.empty()) source = spec_->index_of(k.from.component);
    Destination dest;
    if (!k.to.component.empty()) dest.component = spec_->index_of(k.to.component);
    dest.port = k.to.port;
    routes_[route_key(source, k.from.port)].push_back(std::move(dest));
  }
}

const std::vector<Network::Destination>& Network::destinations(std::optional<std::size_t> source,
                                                               const std::string& port) const {
  static const std::vector<Destination> kNone;
  auto it = routes_.find(route_key(source, port));
  return it == routes_.end() ? kNone : it->second;
}

NetworkState Network::initial_state() const {
  NetworkState ns;
  ns.now = Time::zero();
  for (const auto& c : spec_->components) {
    ns.states.push_back(c.model->initial_state());
    ns.last.push_back(Time::zero());
  }
  return ns;
}

Time Network::next_event_time(const NetworkState& ns) const {
  Time best = Time::infinity();
  for (std::size_t i = 0; i < ns.states.size(); ++i) {
    best = std::min(best, ns.last[i] + ns.states[i].sigma);
  }
  return best;
}

Time Network::residual(const NetworkState& ns, std::size_t i) const {
  return (ns.last[i] + ns.states[i].sigma) - ns.now;
}

Bag Network::output(const NetworkState& ns, Time t, TransitionContext& outer) const {
  Bag out;
  for (std::size_t i = 0; i < ns.states.size(); ++i) {
    if (ns.last[i] + ns.states[i].sigma != t) continue;
    Bag y = model(i).output(ns.states[i], outer);
    for (const auto& m : y) {
      for (const auto& d : destinations(i, m.port)) {
        if (!d.component) out.add(d.port, m.job);
      }
    }
  }
  out.canonicalize();
  return out;
}

StepOutcome Network::step(NetworkState& ns, Time t, const Bag& inputs, ChoiceSource& choices,
                          Time absolute) const {
  const std::size_t n = ns.states.size();
  StepOutcome outcome;
  outcome.time = t;
  StepContext ctx(absolute, choices, *spec_, outcome.notes);

  std::vector<bool> imminent(n, false);
  std::vector<Bag> outputs(n);
  std::vector<Bag> received(n);

  for (std::size_t i = 0; i < n; ++i) {
    if (ns.last[i] + ns.states[i].sigma != t) continue;
    imminent[i] = true;
    ctx.set_component(i);
    outputs[i] = model(i).output(ns.states[i], ctx);
    outputs[i].canonicalize();
    for (const auto& m : outputs[i]) {
      for (const auto& d : destinations(i, m.port)) {
        if (d.component) {
          received[*d.component].add(d.port, m.job);
        } else {
          outcome.external_outputs.add(d.port, m.job);
        }
      }
    }
  }
  for (const auto& m : inputs) {
    for (const auto& d : destinations(std::nullopt, m.port)) {
      if (d.component) {
        received[*d.component].add(d.port, m.job);
      } else {
        outcome.external_outputs.add(d.port, m.job);
      }
    }
  }
  outcome.external_outputs.canonicalize();

  for (std::size_t i = 0; i < n; ++i) {
    Bag& x = received[i];
    if (!imminent[i] && x.empty()) continue;
    const AtomicSpec& m = model(i);
    State& s = ns.states[i];
    if (!imminent[i] && m.absorbing(s)) continue;

    x.canonicalize();
    ctx.set_component(i);
    Transition tr;
    tr.component = i;
    tr.phase_before = s.phase;
    if (imminent[i] && x.empty()) {
      tr.kind = TransitionKind::internal;
      s = m.internal(s, ctx);
    } else if (imminent[i]) {
      tr.kind = TransitionKind::confluent;
      ConfluentOrder order = m.confluent_order();
      if (choices.explore_confluent() && choices.choose(2, i, std::nullopt) == 1) {
        order = order == ConfluentOrder::ext_then_int ? ConfluentOrder::int_then_ext
                                                      : ConfluentOrder::ext_then_int;
      }
      s = m.confluent(s, x, ctx, order);
    } else {
      tr.kind = TransitionKind::external;
      s = m.external(s, t - ns.last[i], x, ctx);
    }
    ns.last[i] = t;
    tr.phase_after = s.phase;
    tr.outputs = std::move(outputs[i]);
    outcome.transitions.push_back(std::move(tr));
  }
  ns.now = t;
  return outcome;
}

void Network::rebase(NetworkState& ns) const {
  for (std::size_t i = 0; i < ns.states.size(); ++i) {
    ns.states[i] = model(i).advance(ns.states[i], ns.now - ns.last[i]);
    ns.last[i] = ns.now;
  }
}

bool Network::all_passive(const NetworkState& ns) const {
  return next_event_time(ns).is_infinite();
}

bool Network::all_accepting(const NetworkState& ns) const {
  for (std::size_t i = 0; i < ns.states.size(); ++i) {
    if (!model(i).accepting(ns.states[i])) return false;
  }
  return true;
}

std::string state_key(const Network& net, const NetworkState& ns, Time offset) {
  std::string key;
  for (std::size_t i = 0; i < ns.states.size(); ++i) {
    net.model(i).append_key(key, ns.states[i]);
    Time r = net.residual(ns, i);
    key += '@';
    key += r.is_infinite() ? std::string("inf") : std::to_string((r - offset).ticks());
    key += ';';
  }
  return key;
}

}  // namespace actsim::devs
