// actsim: validate, simulate, check and export activity models.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "actsim/checker.hpp"
#include "actsim/config_search.hpp"
#include "actsim/dsl.hpp"
#include "actsim/simulator.hpp"
#include "actsim/synthesis.hpp"
#include "actsim/templates.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kInvalid = 2, kViolated = 3, kBudget = 4 };

/// Terminates a command with an exit code after printing `message`.
struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kUsage, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary sibling and renames it into place, so readers
// never observe a partial file.
void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure{kUsage, "cannot write '" + path + "'"};
    out << content;
    if (!out.flush()) throw Failure{kUsage, "cannot write '" + path + "'"};
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Failure{kUsage, "cannot move output into '" + path + "': " + ec.message()};
  }
}

struct Overrides {
  std::optional<std::uint64_t> capacity;
  std::string overflow;
  std::string confluent;
  std::string site;
  std::uint64_t tick_scale = 1;
};

actsim::SemanticsConfig semantics(const Overrides& o) {
  actsim::SemanticsConfig c;
  c.capacity = o.capacity;
  if (!o.overflow.empty()) c.overflow = actsim::devs::overflow_from_string(o.overflow);
  if (!o.confluent.empty()) c.confluent = actsim::devs::confluent_from_string(o.confluent);
  if (!o.site.empty()) c.site = *actsim::overflow_site_from_string(o.site);
  c.tick_scale = o.tick_scale;
  return c;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--capacity", o.capacity, "Capacity override at the overflow site");
  cmd->add_option("--overflow", o.overflow, "Overflow policy override")
      ->check(CLI::IsMember({"drop", "stuck"}));
  cmd->add_option("--confluent", o.confluent, "Confluent order for every component")
      ->check(CLI::IsMember({"ext_then_int", "int_then_ext", "ext-then-int", "int-then-ext"}));
  cmd->add_option("--overflow-site", o.site, "Components the capacity/overflow overrides touch")
      ->check(CLI::IsMember({"action", "join", "both"}));
  cmd->add_option("--tick-scale", o.tick_scale, "Ticks per model time unit (power of ten)")
      ->check([](const std::string& v) {
        try {
          return actsim::is_valid_tick_scale(std::stoull(v)) ? std::string{}
                                                            : std::string("not a power of ten");
        } catch (const std::exception&) {
          return std::string("not an integer");
        }
      });
}

void print_diagnostics(const std::string& path, const std::vector<actsim::activity::Diagnostic>& ds) {
  for (const auto& d : ds) {
    std::cerr << path << ":" << d.location.span.line << ":" << d.location.span.column << ": "
              << actsim::activity::to_string(d.severity) << " [" << d.rule << "] "
              << d.location.activity << "/" << d.location.element << ": " << d.message << "\n";
  }
}

/// Parses and validates; diagnostics go to stderr.
actsim::activity::ActivityModel load_model(const std::string& path) {
  std::string text = read_file(path);
  auto parsed = actsim::dsl::parse(text);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors) {
      std::cerr << path << ":" << e.message() << "\n";
    }
    throw Failure{kInvalid, std::to_string(parsed.errors.size()) + " syntax error(s)"};
  }
  auto diags = actsim::activity::validate_model(*parsed.model);
  print_diagnostics(path, diags);
  if (actsim::activity::has_errors(diags)) throw Failure{kInvalid, "model has validation errors"};
  return *parsed.model;
}

actsim::devs::CoupledSpec load_coupled(const std::string& path, const Overrides& o) {
  auto model = load_model(path);
  try {
    return actsim::synthesize(actsim::activity::flatten_hierarchy(model), semantics(o));
  } catch (const std::invalid_argument& e) {
    throw Failure{kInvalid, e.what()};
  }
}

actsim::Time parse_time(const std::string& text, actsim::TickScale scale, const char* what) {
  auto t = actsim::decimal_to_ticks(text, scale);
  if (!t) throw Failure{kUsage, std::string(what) + " '" + text + "' is not a whole number of ticks"};
  return actsim::Time(*t);
}

std::size_t node_budget() {
  const char* env = std::getenv("ACTSIM_NODE_BUDGET");
  if (env == nullptr || *env == '\0') return 1'000'000;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw Failure{kUsage, "ACTSIM_NODE_BUDGET must be a positive integer"};
  }
}

ordered_json witness_json(const std::vector<actsim::check::WitnessStep>& steps,
                          actsim::TickScale scale) {
  ordered_json out = ordered_json::array();
  for (const auto& s : steps) {
    ordered_json states = ordered_json::object();
    for (const auto& p : s.phases) states[p.component] = p.phase;
    out.push_back({{"time", actsim::format_time(s.time, scale)}, {"states", states}, {"via", s.via}});
  }
  return out;
}

int cmd_validate(const std::string& path) {
  load_model(path);
  std::cerr << path << ": ok\n";
  return kOk;
}

int cmd_simulate(const std::string& path, const Overrides& o, const std::string& t_end_text,
                 std::uint64_t seed, const std::string& output) {
  auto spec = load_coupled(path, o);
  actsim::Time t_end = parse_time(t_end_text, o.tick_scale, "--t-end");
  actsim::devs::Simulator sim(spec, {.seed = seed});
  try {
    sim.run(t_end);
  } catch (const actsim::devs::IllegitimateModel& e) {
    throw Failure{kInvalid, e.what()};
  }
  write_output(output, sim.trace().to_csv(o.tick_scale));
  for (const auto& n : sim.trace().notes) {
    std::cerr << "note: t=" << actsim::format_time(n.time, o.tick_scale) << " " << n.component
              << " " << n.kind << ": " << n.message << "\n";
  }
  const auto& net = sim.network();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto* absorber = dynamic_cast<const actsim::devs::AbsorberModel*>(&net.model(i));
    if (absorber == nullptr) continue;
    auto m = absorber->metrics(sim.state().states[i]);
    std::cerr << net.spec().components[i].name << ": absorbed " << m.arrivals.size() << " job(s)";
    if (absorber->is_transducer()) std::cerr << ", throughput " << m.throughput << " per tick";
    std::cerr << "\n";
  }
  return kOk;
}

int cmd_check(const std::string& path, const Overrides& o, const std::string& props_path,
              const std::string& horizon_text, bool explore, const std::string& output) {
  auto spec = load_coupled(path, o);
  std::vector<actsim::check::Property> props;
  try {
    props = actsim::check::parse_property_file(read_file(props_path), o.tick_scale);
  } catch (const actsim::check::FormulaError& e) {
    throw Failure{kInvalid, props_path + ":" + e.what()};
  }
  if (props.empty()) throw Failure{kUsage, "'" + props_path + "' contains no formulae"};

  std::optional<actsim::Time> horizon;
  if (!horizon_text.empty()) {
    horizon = parse_time(horizon_text, o.tick_scale, "--horizon");
  } else {
    std::optional<actsim::Time> largest;
    for (const auto& p : props) {
      for (auto c : actsim::check::clock_constants(p.body)) {
        largest = largest ? std::max(*largest, c) : c;
      }
    }
    if (largest) {
      horizon = *largest + actsim::Time(1);
      std::cerr << "note: no --horizon given; using " << actsim::format_time(*horizon, o.tick_scale)
                << "\n";
    }
  }

  actsim::check::Constraints constraints;
  try {
    constraints = actsim::check::derive_constraints(spec, horizon, explore);
  } catch (const actsim::check::UnconstrainedModel& e) {
    throw Failure{kInvalid, e.what()};
  }
  constraints.node_budget = node_budget();

  std::optional<actsim::check::ReachGraph> graph;
  try {
    graph.emplace(actsim::check::build_reach_graph(spec, constraints));
  } catch (const actsim::check::ResourceError& e) {
    throw Failure{kBudget, e.what()};
  }

  ordered_json report;
  report["model"] = path;
  report["horizon"] = horizon ? actsim::format_time(*horizon, o.tick_scale) : "none";
  report["graph"] = {
      {"nodes", graph->nodes().size()},
      {"edges", graph->edges().size()},
      {"deadlock", graph->count(actsim::check::NodeClass::deadlock)},
      {"quiescent_safe", graph->count(actsim::check::NodeClass::quiescent_safe)},
      {"constraint_violation", graph->count(actsim::check::NodeClass::constraint_violation)}};
  ordered_json results = ordered_json::array();
  bool all = true;
  for (const auto& p : props) {
    actsim::check::Verdict v;
    try {
      v = actsim::check::check(*graph, p, o.tick_scale);
    } catch (const std::invalid_argument& e) {
      throw Failure{kInvalid, p.name + ": " + e.what()};
    }
    all = all && v.satisfied;
    ordered_json r{{"name", v.name}, {"formula", v.formula}, {"satisfied", v.satisfied}};
    if (!v.satisfied) r["violated_at"] = actsim::format_time(v.at, o.tick_scale);
    r["witness"] = witness_json(v.witness, o.tick_scale);
    results.push_back(std::move(r));
    std::cerr << v.name << ": " << (v.satisfied ? "satisfied" : "not satisfied") << "\n";
  }
  report["results"] = std::move(results);
  write_output(output, report.dump(2) + "\n");
  return all ? kOk : kViolated;
}

int cmd_export(const std::string& path, const Overrides& o, const std::string& output) {
  write_output(output, actsim::export_json(load_coupled(path, o), o.tick_scale));
  return kOk;
}

int cmd_search(const actsim::search::Scenario& scenario, const std::string& output) {
  auto report = actsim::search::config_search(scenario, actsim::search::reference_table());
  write_output(output, actsim::search::report_json(report, scenario));
  std::cerr << "max score " << report.max_score << " of " << report.cells << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activity models as DEVS: validate, simulate, verify and export"};
  app.require_subcommand(1);

  std::string input, output, props, horizon, t_end;
  std::uint64_t seed = 0;
  bool explore = false;
  Overrides overrides;

  auto* validate = app.add_subcommand("validate", "Parse and validate a model");
  validate->add_option("input", input, "Model file (.act)")->required();

  auto* simulate = app.add_subcommand("simulate", "Simulate and write a CSV trace");
  simulate->add_option("input", input, "Model file (.act)")->required();
  simulate->add_option("--t-end", t_end, "Simulation end time")->required();
  simulate->add_option("--seed", seed, "Seed for random decisions");
  simulate->add_option("-o,--output", output, "Output path (default: stdout)");
  add_overrides(simulate, overrides);

  auto* check = app.add_subcommand("check", "Verify properties by reachability");
  check->add_option("input", input, "Model file (.act)")->required();
  check->add_option("--props", props, "Property file (.prop)")->required();
  check->add_option("--horizon", horizon, "Clock horizon for the state graph");
  check->add_flag("--explore-confluent", explore, "Branch on both confluent orders");
  check->add_option("-o,--output", output, "Report path (default: stdout)");
  add_overrides(check, overrides);

  auto* exporter = app.add_subcommand("export", "Write the synthesized coupled model as JSON");
  exporter->add_option("input", input, "Model file (.act)")->required();
  exporter->add_option("-o,--output", output, "Output path (default: stdout)");
  add_overrides(exporter, overrides);

  actsim::search::Scenario scenario;
  auto* search = app.add_subcommand("search", "Rank semantic configurations against the reference verdict table");
  search->add_option("--period", scenario.period, "Generator period");
  search->add_option("--t1", scenario.t1, "Duration of a1");
  search->add_option("--count", scenario.count, "Jobs per scenario");
  search->add_option("--horizon", scenario.horizon, "Clock horizon");
  search->add_option("-o,--output", output, "Report path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(input);
    if (*simulate) return cmd_simulate(input, overrides, t_end, seed, output);
    if (*check) return cmd_check(input, overrides, props, horizon, explore, output);
    if (*exporter) return cmd_export(input, overrides, output);
    if (*search) return cmd_search(scenario, output);
  } catch (const Failure& f) {
    std::cerr << "actsim: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "actsim: " << e.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}
