#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "actsim/network.hpp"

namespace actsim::devs {

struct TraceRecord {
  Time time;
  std::string component;
  TransitionKind kind = TransitionKind::internal;
  std::string phase_before;
  std::string phase_after;
  Bag outputs;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::vector<Note> notes;

  /// CSV with header `time,component,kind,phase_before,phase_after,outputs`.
  void write_csv(std::ostream& os, TickScale scale = 1) const;
  std::string to_csv(TickScale scale = 1) const;

  /// Records of `component` that emitted at least one output.
  std::vector<TraceRecord> emissions(std::string_view component) const;
};

struct SimOptions {
  std::uint64_t seed = 0;
  /// Maximum number of consecutive steps at one clock value.
  std::size_t transitory_bound = 1000;
  bool record_trace = true;
};

struct StepReport {
  Time time;
  std::vector<Transition> transitions;
  Bag external_outputs;
};

/// Snapshot of the whole simulation, rebased so each sigma is a residual.
struct Snapshot {
  std::vector<State> states;
  Time time;
};

/// Single-threaded root coordinator over a coupled model.
class Simulator {
 public:
  explicit Simulator(std::shared_ptr<const CoupledSpec> spec, SimOptions options = {});
  Simulator(const CoupledSpec& spec, SimOptions options = {});

  const Network& network() const { return net_; }
  const NetworkState& state() const { return ns_; }
  Time now() const { return ns_.now; }
  Time next_event_time() const { return net_.next_event_time(ns_); }

  /// Executes all transitions at the next event time. Requires a finite
  /// next event time. Throws IllegitimateModel past the transitory bound.
  StepReport step();
  StepReport step(ChoiceSource& choices);

  /// Steps until the next event lies beyond `t_end` (or never comes).
  const Trace& run(Time t_end);

  const Trace& trace() const { return trace_; }

  Snapshot snapshot() const;
  void restore(const Snapshot& snapshot);

 private:
  Network net_;
  SimOptions options_;
  SeededChoices choices_;
  NetworkState ns_;
  Trace trace_;
  Time same_time_at_ = Time::infinity();
  std::size_t same_time_steps_ = 0;
};

}  // namespace actsim::devs
