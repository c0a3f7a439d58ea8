#include "actsim/devs.hpp"

#include <algorithm>
#include <set>

#include "actsim/network.hpp"

namespace actsim::devs {

Job Job::single(std::uint64_t id, Time created, std::vector<std::string> tags) {
  return Job{{id}, std::move(tags), created};
}

std::string Job::label() const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += '+';
    out += std::to_string(ids[i]);
  }
  return out;
}

void Bag::canonicalize() {
  std::stable_sort(items_.begin(), items_.end(), [](const Message& a, const Message& b) {
    if (a.port != b.port) return a.port < b.port;
    return a.job.ids < b.job.ids;
  });
}

std::vector<Job> Bag::on_port(std::string_view port) const {
  std::vector<Job> out;
  for (const auto& m : items_) {
    if (m.port == port) out.push_back(m.job);
  }
  return out;
}

std::string Bag::to_string() const {
  std::string out;
  for (const auto& m : items_) {
    if (!out.empty()) out += ' ';
    out += m.port + ":" + m.job.label();
  }
  return out;
}

std::string_view to_string(ConfluentOrder order) {
  return order == ConfluentOrder::ext_then_int ? "ext_then_int" : "int_then_ext";
}

std::optional<ConfluentOrder> confluent_from_string(std::string_view text) {
  if (text == "ext_then_int" || text == "ext-then-int") return ConfluentOrder::ext_then_int;
  if (text == "int_then_ext" || text == "int-then-ext") return ConfluentOrder::int_then_ext;
  return std::nullopt;
}

State AtomicSpec::confluent(const State& s, const Bag& x, TransitionContext& ctx,
                            ConfluentOrder order) const {
  if (order == ConfluentOrder::ext_then_int) {
    return internal(external(s, s.sigma, x, ctx), ctx);
  }
  return external(internal(s, ctx), Time::zero(), x, ctx);
}

State AtomicSpec::advance(const State& s, Time elapsed) const {
  State out = s;
  out.sigma = s.sigma - elapsed;
  return out;
}

namespace {

void append_job(std::string& out, const Job& job) {
  out += job.label();
  for (const auto& tag : job.tags) {
    out += '#';
    out += tag;
  }
}

void append_default_key(std::string& out, const State& s) {
  out += s.phase;
  out += '[';
  for (auto v : s.vars) {
    out += std::to_string(v);
    out += ',';
  }
  out += ']';
  for (const auto& store : s.stores) {
    out += '(';
    for (const auto& job : store) {
      append_job(out, job);
      out += ',';
    }
    out += ')';
  }
  for (const auto& child : s.children) {
    out += '{';
    append_default_key(out, child);
    out += '}';
  }
}

}  // namespace

void AtomicSpec::append_key(std::string& out, const State& s) const {
  append_default_key(out, s);
}

std::string PortRef::to_string() const {
  return (component.empty() ? std::string("<boundary>") : component) + "." + port;
}

std::optional<std::size_t> CoupledSpec::index_of(std::string_view component) const {
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].name == component) return i;
  }
  return std::nullopt;
}

const Component* CoupledSpec::find(std::string_view component) const {
  auto i = index_of(component);
  return i ? &components[*i] : nullptr;
}

bool CoupledSpec::nondeterministic() const {
  return std::any_of(components.begin(), components.end(),
                     [](const Component& c) { return c.model->nondeterministic(); });
}

IllegitimateModel::IllegitimateModel(Time at, std::vector<std::string> components)
    : std::runtime_error([&] {
        std::string msg = "illegitimate model: zero-time transitions exceed the transitory bound at t=" +
                          format_time(at) + " involving";
        for (const auto& c : components) msg += " " + c;
        return msg;
      }()),
      at_(at),
      components_(std::move(components)) {}

void validate_coupled(const CoupledSpec& spec) {
  std::set<std::string> names;
  for (const auto& c : spec.components) {
    if (c.name.empty()) throw ModelError("component with empty name");
    if (!c.model) throw ModelError("component '" + c.name + "' has no model");
    if (!names.insert(c.name).second) throw ModelError("duplicate component '" + c.name + "'");
  }
  auto has = [](const std::vector<std::string>& ports, const std::string& p) {
    return std::find(ports.begin(), ports.end(), p) != ports.end();
  };
  for (const auto& k : spec.couplings) {
    if (k.from.component.empty()) {
      if (!has(spec.input_ports, k.from.port))
        throw ModelError("coupling source " + k.from.to_string() + " is not an input port");
    } else {
      const Component* c = spec.find(k.from.component);
      if (c == nullptr || !has(c->model->output_ports(), k.from.port))
        throw ModelError("coupling source " + k.from.to_string() + " does not exist");
    }
    if (k.to.component.empty()) {
      if (!has(spec.output_ports, k.to.port))
        throw ModelError("coupling target " + k.to.to_string() + " is not an output port");
    } else {
      const Component* c = spec.find(k.to.component);
      if (c == nullptr || !has(c->model->input_ports(), k.to.port))
        throw ModelError("coupling target " + k.to.to_string() + " does not exist");
    }
  }
}

namespace {

class ContextChoices final : public ChoiceSource {
 public:
  explicit ContextChoices(TransitionContext& ctx) : ctx_(ctx) {}
  std::size_t choose(std::size_t n, std::size_t, std::optional<std::uint64_t> seed) override {
    return ctx_.random_choice(n, seed);
  }

 private:
  TransitionContext& ctx_;
};

// Resultant of a coupled model. Children are stored rebased so that every
// child's sigma is its residual measured from this component's last
// transition.
class CoupledAtomic final : public AtomicSpec {
 public:
  explicit CoupledAtomic(std::shared_ptr<const CoupledSpec> spec)
      : AtomicSpec(spec->input_ports, spec->output_ports, ConfluentOrder::ext_then_int),
        net_(std::move(spec)) {}

  std::string_view type_name() const override { return "coupled"; }

  State initial_state() const override {
    NetworkState ns = net_.initial_state();
    return pack(std::move(ns));
  }

  State internal(const State& s, TransitionContext& ctx) const override {
    return run(s, s.sigma, Bag{}, ctx);
  }

  State external(const State& s, Time elapsed, const Bag& x,
                 TransitionContext& ctx) const override {
    return run(s, elapsed, x, ctx);
  }

  State confluent(const State& s, const Bag& x, TransitionContext& ctx,
                  ConfluentOrder) const override {
    return run(s, s.sigma, x, ctx);
  }

  Bag output(const State& s, TransitionContext& ctx) const override {
    return net_.output(unpack(s), s.sigma, ctx);
  }

  State advance(const State& s, Time elapsed) const override {
    State out = s;
    out.sigma = s.sigma - elapsed;
    for (std::size_t i = 0; i < out.children.size(); ++i) {
      out.children[i] = net_.model(i).advance(s.children[i], elapsed);
    }
    return out;
  }

  std::vector<std::string> phases() const override { return {"active", "passive"}; }

  bool accepting(const State& s) const override { return net_.all_accepting(unpack(s)); }

  bool nondeterministic() const override { return net_.spec().nondeterministic(); }

  std::vector<VariableDomain> variable_domains() const override {
    std::vector<VariableDomain> out;
    for (std::size_t i = 0; i < net_.size(); ++i) {
      for (auto d : net_.model(i).variable_domains()) {
        d.name = net_.spec().components[i].name + "." + d.name;
        out.push_back(std::move(d));
      }
    }
    return out;
  }

  std::vector<std::int64_t> variable_values(const State& s) const override {
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < net_.size(); ++i) {
      auto v = net_.model(i).variable_values(s.children[i]);
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  }

  void append_key(std::string& out, const State& s) const override {
    out += state_key(net_, unpack(s), Time::zero());
  }

 private:
  NetworkState unpack(const State& s) const {
    NetworkState ns;
    ns.states = s.children;
    ns.last.assign(ns.states.size(), Time::zero());
    ns.now = Time::zero();
    return ns;
  }

  State pack(NetworkState ns) const {
    net_.rebase(ns);
    State out;
    out.sigma = Time::infinity();
    for (const auto& child : ns.states) out.sigma = std::min(out.sigma, child.sigma);
    out.phase = out.sigma.is_infinite() ? "passive" : "active";
    out.children = std::move(ns.states);
    return out;
  }

  State run(const State& s, Time at, const Bag& x, TransitionContext& ctx) const {
    NetworkState ns = unpack(s);
    ContextChoices choices(ctx);
    StepOutcome outcome = net_.step(ns, at, x, choices, ctx.now());
    for (auto& n : outcome.notes) ctx.note(n.kind, n.component + ": " + n.message);
    return pack(std::move(ns));
  }

  Network net_;
};

}  // namespace

AtomicPtr as_atomic(std::shared_ptr<const CoupledSpec> spec) {
  validate_coupled(*spec);
  return std::make_shared<CoupledAtomic>(std::move(spec));
}

}  // namespace actsim::devs
