#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actsim/time.hpp"

namespace actsim::devs {

/// A unit of work flowing through the network. Merged jobs (from a join)
/// carry the sorted ids of their constituents.
struct Job {
  std::vector<std::uint64_t> ids;
  std::vector<std::string> tags;
  Time created;

  static Job single(std::uint64_t id, Time created, std::vector<std::string> tags = {});

  std::uint64_t primary_id() const { return ids.empty() ? 0 : ids.front(); }
  /// "7" for a simple job, "3+3" for a merged one.
  std::string label() const;

  auto operator<=>(const Job&) const = default;
};

struct Message {
  std::string port;
  Job job;

  auto operator<=>(const Message&) const = default;
};

/// Multiset of port/job pairs. `canonicalize` orders it by port name, then
/// job id, which is the order transition functions observe.
class Bag {
 public:
  Bag() = default;

  void add(std::string port, Job job) { items_.push_back({std::move(port), std::move(job)}); }
  void append(const Bag& other) {
    items_.insert(items_.end(), other.items_.begin(), other.items_.end());
  }
  void canonicalize();

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  std::vector<Message>::const_iterator begin() const { return items_.begin(); }
  std::vector<Message>::const_iterator end() const { return items_.end(); }
  const Message& operator[](std::size_t i) const { return items_[i]; }

  std::vector<Job> on_port(std::string_view port) const;
  std::string to_string() const;

  bool operator==(const Bag&) const = default;

 private:
  std::vector<Message> items_;
};

/// Generic value state shared by all atomic templates. `sigma` is the time
/// advance set at the last transition; each template assigns its own
/// meaning to `vars`, `stores` and `children`.
struct State {
  std::string phase;
  Time sigma = Time::infinity();
  std::vector<std::int64_t> vars;
  std::vector<std::vector<Job>> stores;
  std::vector<State> children;

  bool operator==(const State&) const = default;
};

enum class ConfluentOrder { ext_then_int, int_then_ext };

std::string_view to_string(ConfluentOrder order);
std::optional<ConfluentOrder> confluent_from_string(std::string_view text);

/// A finite-or-unbounded integer domain for one state variable.
struct VariableDomain {
  std::string name;
  std::int64_t lo = 0;
  std::optional<std::int64_t> hi;  // nullopt = declared unbounded

  bool contains(std::int64_t v) const { return v >= lo && (!hi || v <= *hi); }
};

struct Note {
  Time time;
  std::string component;
  std::string kind;  // "drop", "stuck", "routing-error", ...
  std::string message;
};

/// Services a transition function may use. Provided by the kernel.
class TransitionContext {
 public:
  virtual ~TransitionContext() = default;

  virtual Time now() const = 0;
  /// Picks one of `n` alternatives. The simulator draws from a seeded RNG;
  /// the checker enumerates every alternative.
  virtual std::size_t random_choice(std::size_t n, std::optional<std::uint64_t> seed) = 0;
  virtual void note(std::string kind, std::string message) = 0;
};

/// The atomic structure: input/output ports, a state set with time advance
/// `sigma`, internal/external/confluent transitions and an output function.
///
/// Transition functions may depend on elapsed time only through
/// `sigma - elapsed`; the checker relies on this to rebase residuals.
class AtomicSpec {
 public:
  virtual ~AtomicSpec() = default;

  virtual std::string_view type_name() const = 0;

  const std::vector<std::string>& input_ports() const { return inputs_; }
  const std::vector<std::string>& output_ports() const { return outputs_; }
  ConfluentOrder confluent_order() const { return confluent_; }

  virtual State initial_state() const = 0;
  Time time_advance(const State& s) const { return s.sigma; }

  virtual State internal(const State& s, TransitionContext& ctx) const = 0;
  virtual State external(const State& s, Time elapsed, const Bag& x,
                         TransitionContext& ctx) const = 0;
  /// Default composes internal/external according to `order`.
  virtual State confluent(const State& s, const Bag& x, TransitionContext& ctx,
                          ConfluentOrder order) const;
  /// Consulted only when the component is imminent.
  virtual Bag output(const State& s, TransitionContext& ctx) const = 0;

  /// Moves `elapsed` ticks forward without a transition.
  virtual State advance(const State& s, Time elapsed) const;

  virtual std::vector<std::string> phases() const = 0;
  /// Phase atoms match refinements too (e.g. a stuck action is still busy).
  virtual bool in_phase(const State& s, std::string_view phase) const { return s.phase == phase; }
  /// Accepting phases make an all-passive global state benign.
  virtual bool accepting(const State& s) const = 0;
  /// Absorbing states ignore input and never appear in later trace events.
  virtual bool absorbing(const State&) const { return false; }
  /// True if the template draws random choices without a fixed seed.
  virtual bool nondeterministic() const { return false; }

  virtual std::vector<VariableDomain> variable_domains() const { return {}; }
  /// Values in the order of `variable_domains()`.
  virtual std::vector<std::int64_t> variable_values(const State&) const { return {}; }

  /// Appends a canonical encoding of the discrete part of `s` (everything
  /// except sigma and job creation times) for state hashing.
  virtual void append_key(std::string& out, const State& s) const;

  /// Template parameters for export, as (key, rendered value) pairs.
  virtual std::vector<std::pair<std::string, std::string>> parameters() const { return {}; }

 protected:
  AtomicSpec(std::vector<std::string> inputs, std::vector<std::string> outputs,
             ConfluentOrder confluent)
      : inputs_(std::move(inputs)), outputs_(std::move(outputs)), confluent_(confluent) {}

  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  ConfluentOrder confluent_;
};

using AtomicPtr = std::shared_ptr<const AtomicSpec>;

struct PortRef {
  std::string component;  // empty = the coupled model's own boundary
  std::string port;

  auto operator<=>(const PortRef&) const = default;
  std::string to_string() const;
};

struct Coupling {
  PortRef from;
  PortRef to;

  auto operator<=>(const Coupling&) const = default;
};

struct Component {
  std::string name;
  AtomicPtr model;
};

/// A network of named components with port couplings. Boundary couplings
/// (external input/output) use an empty component name.
struct CoupledSpec {
  std::string name;
  std::vector<Component> components;
  std::vector<Coupling> couplings;
  std::vector<std::string> input_ports;
  std::vector<std::string> output_ports;

  std::optional<std::size_t> index_of(std::string_view component) const;
  const Component* find(std::string_view component) const;
  bool nondeterministic() const;
};

/// Raised for malformed coupled models (unknown ports, duplicate names).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when zero-time transitions exceed the transitory bound.
class IllegitimateModel : public std::runtime_error {
 public:
  IllegitimateModel(Time at, std::vector<std::string> components);
  const std::vector<std::string>& components() const { return components_; }
  Time time() const { return at_; }

 private:
  Time at_;
  std::vector<std::string> components_;
};

/// Checks names and that every coupling references an existing port.
void validate_coupled(const CoupledSpec& spec);

/// Wraps a coupled model as an atomic one (closure under coupling).
AtomicPtr as_atomic(std::shared_ptr<const CoupledSpec> spec);

}  // namespace actsim::devs
