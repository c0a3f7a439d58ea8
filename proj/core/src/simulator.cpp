#include "actsim/simulator.hpp"

#include <sstream>
#include <stdexcept>

namespace actsim::devs {

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void Trace::write_csv(std::ostream& os, TickScale scale) const {
  os << "time,component,kind,phase_before,phase_after,outputs\n";
  for (const auto& r : records) {
    os << format_time(r.time, scale) << ',' << csv_field(r.component) << ',' << to_string(r.kind)
       << ',' << csv_field(r.phase_before) << ',' << csv_field(r.phase_after) << ','
       << csv_field(r.outputs.to_string()) << '\n';
  }
}

std::string Trace::to_csv(TickScale scale) const {
  std::ostringstream os;
  write_csv(os, scale);
  return os.str();
}

std::vector<TraceRecord> Trace::emissions(std::string_view component) const {
  std::vector<TraceRecord> out;
  for (const auto& r : records) {
    if (r.component == component && !r.outputs.empty()) out.push_back(r);
  }
  return out;
}

Simulator::Simulator(std::shared_ptr<const CoupledSpec> spec, SimOptions options)
    : net_(std::move(spec)),
      options_(options),
      choices_(options.seed),
      ns_(net_.initial_state()) {}

Simulator::Simulator(const CoupledSpec& spec, SimOptions options)
    : Simulator(std::make_shared<const CoupledSpec>(spec), options) {}

StepReport Simulator::step() { return step(choices_); }

StepReport Simulator::step(ChoiceSource& choices) {
  Time t = next_event_time();
  if (t.is_infinite()) throw std::logic_error("step() on a passive model");

  if (t == same_time_at_) {
    if (++same_time_steps_ > options_.transitory_bound) {
      std::vector<std::string> involved;
      NetworkState probe = ns_;
      StepOutcome o = net_.step(probe, t, Bag{}, choices, t);
      for (const auto& tr : o.transitions) {
        involved.push_back(net_.spec().components[tr.component].name);
      }
      throw IllegitimateModel(t, std::move(involved));
    }
  } else {
    same_time_at_ = t;
    same_time_steps_ = 1;
  }

  StepOutcome outcome = net_.step(ns_, t, Bag{}, choices, t);
  StepReport report{t, std::move(outcome.transitions), std::move(outcome.external_outputs)};
  if (options_.record_trace) {
    for (const auto& tr : report.transitions) {
      trace_.records.push_back({t, net_.spec().components[tr.component].name, tr.kind,
                                tr.phase_before, tr.phase_after, tr.outputs});
    }
    for (auto& n : outcome.notes) trace_.notes.push_back(std::move(n));
  }
  return report;
}

const Trace& Simulator::run(Time t_end) {
  while (true) {
    Time t = next_event_time();
    if (t.is_infinite() || t > t_end) break;
    step();
  }
  return trace_;
}

Snapshot Simulator::snapshot() const {
  NetworkState copy = ns_;
  net_.rebase(copy);
  return {std::move(copy.states), copy.now};
}

void Simulator::restore(const Snapshot& snapshot) {
  ns_.states = snapshot.states;
  ns_.last.assign(ns_.states.size(), snapshot.time);
  ns_.now = snapshot.time;
  same_time_at_ = Time::infinity();
  same_time_steps_ = 0;
}

}  // namespace actsim::devs
