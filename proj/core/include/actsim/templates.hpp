#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actsim/devs.hpp"

namespace actsim::devs {

enum class Overflow { drop, stuck };

std::string_view to_string(Overflow overflow);
std::optional<Overflow> overflow_from_string(std::string_view text);

/// Server with a FIFO waiting room. `capacity` bounds the jobs waiting
/// behind the one in service; nullopt means unbounded.
struct ActionParams {
  Time duration = Time::zero();
  std::optional<std::uint64_t> capacity;
  Overflow overflow = Overflow::drop;
  ConfluentOrder confluent = ConfluentOrder::ext_then_int;
};

/// Phases idle, busy, stuck. A finished job is released through a
/// zero-time step so that its departure can coincide with new arrivals.
class ActionModel final : public AtomicSpec {
 public:
  explicit ActionModel(ActionParams params);

  const ActionParams& params() const { return params_; }

  std::string_view type_name() const override { return "action"; }
  State initial_state() const override;
  State internal(const State& s, TransitionContext& ctx) const override;
  State external(const State& s, Time elapsed, const Bag& x,
                 TransitionContext& ctx) const override;
  Bag output(const State& s, TransitionContext& ctx) const override;
  std::vector<std::string> phases() const override { return {"idle", "busy", "stuck"}; }
  bool in_phase(const State& s, std::string_view phase) const override;
  bool accepting(const State& s) const override { return s.phase == "idle"; }
  bool absorbing(const State& s) const override { return s.phase == "stuck"; }
  std::vector<VariableDomain> variable_domains() const override;
  std::vector<std::int64_t> variable_values(const State& s) const override;
  std::vector<std::pair<std::string, std::string>> parameters() const override;

 private:
  State start(State s, Job job) const;

  ActionParams params_;
};

struct GeneratorParams {
  Time period = Time(1);
  /// nullopt = unbounded (simulation only).
  std::optional<std::uint64_t> count;
  /// Cycled over emitted jobs; empty means untagged.
  std::vector<std::string> tags;
};

/// Emits job k at k * period for k = 1..count, then passivates.
class GeneratorModel final : public AtomicSpec {
 public:
  explicit GeneratorModel(GeneratorParams params);

  const GeneratorParams& params() const { return params_; }

  std::string_view type_name() const override { return "generator"; }
  State initial_state() const override;
  State internal(const State& s, TransitionContext& ctx) const override;
  State external(const State& s, Time elapsed, const Bag& x,
                 TransitionContext& ctx) const override;
  Bag output(const State& s, TransitionContext& ctx) const override;
  std::vector<std::string> phases() const override { return {"armed", "done"}; }
  bool accepting(const State& s) const override { return s.phase == "done"; }
  std::vector<VariableDomain> variable_domains() const override;
  std::vector<std::int64_t> variable_values(const State& s) const override;
  std::vector<std::pair<std::string, std::string>> parameters() const override;

 private:
  GeneratorParams params_;
};

enum class SyncMode { fork, join };

struct SyncParams {
  SyncMode mode = SyncMode::fork;
  /// Fork: one input, one output per target. Join: one input per source.
  std::vector<std::string> in_ports;
  std::vector<std::string> out_ports;
  Time delay = Time::zero();
  /// Join only: jobs a port may hold beyond its slot. nullopt = unbounded.
  std::optional<std::uint64_t> capacity;
  Overflow overflow = Overflow::drop;
  ConfluentOrder confluent = ConfluentOrder::ext_then_int;
};

/// Fork duplicates every job onto all outputs. Join keeps a FIFO per input
/// port and emits one merged job whenever every port holds a job.
class SyncModel final : public AtomicSpec {
 public:
  explicit SyncModel(SyncParams params);

  const SyncParams& params() const { return params_; }

  std::string_view type_name() const override;
  State initial_state() const override;
  State internal(const State& s, TransitionContext& ctx) const override;
  State external(const State& s, Time elapsed, const Bag& x,
                 TransitionContext& ctx) const override;
  Bag output(const State& s, TransitionContext& ctx) const override;
  std::vector<std::string> phases() const override;
  bool accepting(const State& s) const override;
  bool absorbing(const State& s) const override { return s.phase == "stuck"; }
  std::vector<VariableDomain> variable_domains() const override;
  std::vector<std::int64_t> variable_values(const State& s) const override;
  std::vector<std::pair<std::string, std::string>> parameters() const override;

 private:
  std::size_t outbox() const;
  std::size_t ready() const { return outbox() + 1; }
  State schedule(State s) const;

  SyncParams params_;
};

/// Merges constituent jobs: sorted ids, union of tags, earliest creation.
Job merge_jobs(const std::vector<Job>& parts);

enum class SelectMode { decision, merge };
enum class SelectPolicy { round_robin, random, guard };

std::string_view to_string(SelectPolicy policy);

struct SelectParams {
  SelectMode mode = SelectMode::decision;
  std::vector<std::string> in_ports;
  std::vector<std::string> out_ports;
  Time delay = Time::zero();
  SelectPolicy policy = SelectPolicy::round_robin;
  std::optional<std::uint64_t> seed;
  /// Guard policy: job tag -> output port.
  std::map<std::string, std::string> guards;
  /// Guard policy fallback output port.
  std::optional<std::string> fallback;
  ConfluentOrder confluent = ConfluentOrder::ext_then_int;
};

/// Decision routes each job to exactly one output; merge funnels all inputs
/// onto its single output in arrival order.
class SelectModel final : public AtomicSpec {
 public:
  explicit SelectModel(SelectParams params);

  const SelectParams& params() const { return params_; }

  std::string_view type_name() const override;
  State initial_state() const override;
  State internal(const State& s, TransitionContext& ctx) const override;
  State external(const State& s, Time elapsed, const Bag& x,
                 TransitionContext& ctx) const override;
  Bag output(const State& s, TransitionContext& ctx) const override;
  std::vector<std::string> phases() const override { return {"idle", "emitting"}; }
  bool accepting(const State& s) const override { return s.phase == "idle"; }
  bool nondeterministic() const override;
  std::vector<VariableDomain> variable_domains() const override;
  std::vector<std::int64_t> variable_values(const State& s) const override;
  std::vector<std::pair<std::string, std::string>> parameters() const override;

 private:
  std::size_t lanes() const { return params_.out_ports.size(); }
  std::optional<std::size_t> route(State& s, const Job& job, TransitionContext& ctx) const;

  SelectParams params_;
};

/// Jobs absorbed by a transducer or sink, with arrival times.
struct Arrival {
  Job job;
  Time at;
};

struct TransducerMetrics {
  std::vector<Arrival> arrivals;
  /// arrival time - creation time, per absorbed constituent-bearing job.
  std::vector<Time> turnarounds;
  /// departures / max(1, window) in jobs per tick.
  double throughput = 0.0;
};

/// Experimental-frame transducer and final-node sink: absorbs every job,
/// never outputs. Only the phase takes part in the state key.
class AbsorberModel final : public AtomicSpec {
 public:
  AbsorberModel(bool transducer, Time window);

  bool is_transducer() const { return transducer_; }
  Time window() const { return window_; }

  std::string_view type_name() const override { return transducer_ ? "transducer" : "sink"; }
  State initial_state() const override;
  State internal(const State& s, TransitionContext& ctx) const override;
  State external(const State& s, Time elapsed, const Bag& x,
                 TransitionContext& ctx) const override;
  Bag output(const State& s, TransitionContext& ctx) const override;
  std::vector<std::string> phases() const override { return {"observing"}; }
  bool accepting(const State&) const override { return true; }
  void append_key(std::string& out, const State& s) const override;
  std::vector<std::pair<std::string, std::string>> parameters() const override;

  TransducerMetrics metrics(const State& s) const;

 private:
  bool transducer_;
  Time window_;
};

AtomicPtr make_action(ActionParams params);
AtomicPtr make_generator(GeneratorParams params);
AtomicPtr make_sync(SyncParams params);
AtomicPtr make_select(SelectParams params);
AtomicPtr make_transducer(Time window);
AtomicPtr make_sink();

}  // namespace actsim::devs
