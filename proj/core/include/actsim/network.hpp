#pragma once

#include <memory>
#include <random>
#include <unordered_map>
#include <vector>

#include "actsim/devs.hpp"

namespace actsim::devs {

/// Resolves nondeterminism during a step.
class ChoiceSource {
 public:
  virtual ~ChoiceSource() = default;
  /// Returns a value in [0, n).
  virtual std::size_t choose(std::size_t n, std::size_t component,
                             std::optional<std::uint64_t> seed) = 0;
  /// When true, each confluent transition asks for a choice between the
  /// configured order (0) and the opposite order (1).
  virtual bool explore_confluent() const { return false; }
};

/// Seeded per-component generators. A component's own seed wins over the
/// run seed.
class SeededChoices final : public ChoiceSource {
 public:
  explicit SeededChoices(std::uint64_t seed = 0) : seed_(seed) {}
  std::size_t choose(std::size_t n, std::size_t component,
                     std::optional<std::uint64_t> seed) override;

 private:
  std::uint64_t seed_;
  std::unordered_map<std::size_t, std::mt19937_64> engines_;
};

/// Replays a fixed script of choices and records the arity of each request.
/// Requests beyond the script answer 0.
class ScriptedChoices final : public ChoiceSource {
 public:
  explicit ScriptedChoices(std::vector<std::size_t> script = {}, bool explore_confluent = false)
      : script_(std::move(script)), explore_confluent_(explore_confluent) {}

  std::size_t choose(std::size_t n, std::size_t component,
                     std::optional<std::uint64_t> seed) override;
  bool explore_confluent() const override { return explore_confluent_; }

  const std::vector<std::size_t>& taken() const { return taken_; }
  const std::vector<std::size_t>& arities() const { return arities_; }

 private:
  std::vector<std::size_t> script_;
  bool explore_confluent_;
  std::vector<std::size_t> taken_;
  std::vector<std::size_t> arities_;
};

/// Per-component state and time of last transition.
struct NetworkState {
  std::vector<State> states;
  std::vector<Time> last;
  Time now;
};

enum class TransitionKind { internal, external, confluent };

std::string_view to_string(TransitionKind kind);

struct Transition {
  std::size_t component = 0;
  TransitionKind kind = TransitionKind::internal;
  std::string phase_before;
  std::string phase_after;
  Bag outputs;
};

struct StepOutcome {
  Time time;
  std::vector<Transition> transitions;
  Bag external_outputs;
  std::vector<Note> notes;
};

/// Executes the coupled-model protocol over a NetworkState: collect outputs
/// of imminent components, route them, then apply internal, external or
/// confluent transitions.
class Network {
 public:
  explicit Network(std::shared_ptr<const CoupledSpec> spec);

  const CoupledSpec& spec() const { return *spec_; }
  const std::shared_ptr<const CoupledSpec>& spec_ptr() const { return spec_; }
  std::size_t size() const { return spec_->components.size(); }
  const AtomicSpec& model(std::size_t i) const { return *spec_->components[i].model; }

  NetworkState initial_state() const;
  /// min over components of last + ta; infinity iff all are passive.
  Time next_event_time(const NetworkState& ns) const;
  Time residual(const NetworkState& ns, std::size_t i) const;

  /// Boundary outputs the network would emit at time `t`.
  Bag output(const NetworkState& ns, Time t, TransitionContext& outer) const;

  /// One simultaneous step at time `t` (t <= next_event_time). `absolute`
  /// is the wall-clock time reported to transition functions.
  StepOutcome step(NetworkState& ns, Time t, const Bag& inputs, ChoiceSource& choices,
                   Time absolute) const;

  /// Rewrites every sigma as the residual at `ns.now` and sets last = now.
  void rebase(NetworkState& ns) const;

  bool all_passive(const NetworkState& ns) const;
  bool all_accepting(const NetworkState& ns) const;

 private:
  struct Destination {
    std::optional<std::size_t> component;  // nullopt = boundary output
    std::string port;
  };

  const std::vector<Destination>& destinations(std::optional<std::size_t> source,
                                               const std::string& port) const;

  std::shared_ptr<const CoupledSpec> spec_;
  std::unordered_map<std::string, std::vector<Destination>> routes_;
};

/// Encodes the discrete state of every component plus its residual.
/// Residuals are shifted by `offset` (pass the minimum residual to
/// normalize).
std::string state_key(const Network& net, const NetworkState& ns, Time offset);

}  // namespace actsim::devs
