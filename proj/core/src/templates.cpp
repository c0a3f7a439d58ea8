#include "actsim/templates.hpp"

#include <algorithm>
#include <set>

namespace actsim::devs {

std::string_view to_string(Overflow overflow) {
  return overflow == Overflow::drop ? "drop" : "stuck";
}

std::optional<Overflow> overflow_from_string(std::string_view text) {
  if (text == "drop") return Overflow::drop;
  if (text == "stuck") return Overflow::stuck;
  return std::nullopt;
}

std::string_view to_string(SelectPolicy policy) {
  switch (policy) {
    case SelectPolicy::round_robin: return "round_robin";
    case SelectPolicy::random: return "random";
    case SelectPolicy::guard: return "guard";
  }
  return "round_robin";
}

namespace {

std::string ticks(Time t) { return format_time(t); }

std::string capacity_text(const std::optional<std::uint64_t>& c) {
  return c ? std::to_string(*c) : std::string("unbounded");
}

std::optional<std::int64_t> bound(const std::optional<std::uint64_t>& c, std::uint64_t extra = 0) {
  if (!c) return std::nullopt;
  return static_cast<std::int64_t>(*c + extra);
}

std::int64_t size_of(const std::vector<Job>& store) {
  return static_cast<std::int64_t>(store.size());
}

}  // namespace

// ---------------------------------------------------------------- action

namespace {
constexpr std::size_t kCurrent = 0;
constexpr std::size_t kQueue = 1;
constexpr std::size_t kReleasing = 0;
}  // namespace

ActionModel::ActionModel(ActionParams params)
    : AtomicSpec({"in"}, {"out"}, params.confluent), params_(params) {}

State ActionModel::initial_state() const {
  State s;
  s.phase = "idle";
  s.vars = {0};
  s.stores.resize(2);
  return s;
}

State ActionModel::start(State s, Job job) const {
  s.stores[kCurrent] = {std::move(job)};
  s.phase = "busy";
  if (params_.duration == Time::zero()) {
    s.vars[kReleasing] = 1;
    s.sigma = Time::zero();
  } else {
    s.vars[kReleasing] = 0;
    s.sigma = params_.duration;
  }
  return s;
}

State ActionModel::internal(const State& s, TransitionContext&) const {
  if (s.phase != "busy") {
    State out = s;
    out.sigma = Time::infinity();
    return out;
  }
  State out = s;
  if (out.vars[kReleasing] == 0) {
    out.vars[kReleasing] = 1;
    out.sigma = Time::zero();
    return out;
  }
  out.stores[kCurrent].clear();
  auto& queue = out.stores[kQueue];
  if (!queue.empty()) {
    Job next = queue.front();
    queue.erase(queue.begin());
    return start(std::move(out), std::move(next));
  }
  out.phase = "idle";
  out.vars[kReleasing] = 0;
  out.sigma = Time::infinity();
  return out;
}

State ActionModel::external(const State& s, Time elapsed, const Bag& x,
                            TransitionContext& ctx) const {
  State out = advance(s, elapsed);
  for (const auto& job : x.on_port("in")) {
    if (out.phase == "stuck") break;
    if (out.phase == "idle") {
      out = start(std::move(out), job);
      continue;
    }
    auto& queue = out.stores[kQueue];
    if (!params_.capacity || queue.size() < *params_.capacity) {
      queue.push_back(job);
      continue;
    }
    if (params_.overflow == Overflow::drop) {
      ctx.note("drop", "job " + job.label() + " dropped at full capacity");
    } else {
      ctx.note("stuck", "job " + job.label() + " arrived at full capacity");
      out.phase = "stuck";
      out.sigma = Time::infinity();
    }
  }
  return out;
}

Bag ActionModel::output(const State& s, TransitionContext&) const {
  Bag y;
  if (s.phase == "busy" && s.vars[kReleasing] == 1 && !s.stores[kCurrent].empty()) {
    y.add("out", s.stores[kCurrent].front());
  }
  return y;
}

bool ActionModel::in_phase(const State& s, std::string_view phase) const {
  return s.phase == phase || (phase == "busy" && s.phase == "stuck");
}

std::vector<VariableDomain> ActionModel::variable_domains() const {
  return {{"current", 0, 1}, {"queue", 0, bound(params_.capacity)}};
}

std::vector<std::int64_t> ActionModel::variable_values(const State& s) const {
  return {size_of(s.stores[kCurrent]), size_of(s.stores[kQueue])};
}

std::vector<std::pair<std::string, std::string>> ActionModel::parameters() const {
  return {{"duration", ticks(params_.duration)},
          {"capacity", capacity_text(params_.capacity)},
          {"overflow", std::string(to_string(params_.overflow))},
          {"confluent", std::string(to_string(params_.confluent))}};
}

// ------------------------------------------------------------- generator

GeneratorModel::GeneratorModel(GeneratorParams params)
    : AtomicSpec({}, {"out"}, ConfluentOrder::ext_then_int), params_(std::move(params)) {
  if (params_.period == Time::zero() || params_.period.is_infinite()) {
    throw std::invalid_argument("generator period must be positive and finite");
  }
}

State GeneratorModel::initial_state() const {
  State s;
  s.vars = {0};
  if (params_.count && *params_.count == 0) {
    s.phase = "done";
    s.sigma = Time::infinity();
  } else {
    s.phase = "armed";
    s.sigma = params_.period;
  }
  return s;
}

State GeneratorModel::internal(const State& s, TransitionContext&) const {
  State out = s;
  if (out.phase != "armed") {
    out.sigma = Time::infinity();
    return out;
  }
  ++out.vars[0];
  if (params_.count && static_cast<std::uint64_t>(out.vars[0]) >= *params_.count) {
    out.phase = "done";
    out.sigma = Time::infinity();
  } else {
    out.sigma = params_.period;
  }
  return out;
}

State GeneratorModel::external(const State& s, Time elapsed, const Bag&,
                               TransitionContext&) const {
  return advance(s, elapsed);
}

Bag GeneratorModel::output(const State& s, TransitionContext& ctx) const {
  Bag y;
  if (s.phase != "armed") return y;
  auto k = static_cast<std::uint64_t>(s.vars[0]);
  std::vector<std::string> tags;
  if (!params_.tags.empty()) tags.push_back(params_.tags[k % params_.tags.size()]);
  y.add("out", Job::single(k + 1, ctx.now(), std::move(tags)));
  return y;
}

std::vector<VariableDomain> GeneratorModel::variable_domains() const {
  return {{"emitted", 0, bound(params_.count)}};
}

std::vector<std::int64_t> GeneratorModel::variable_values(const State& s) const {
  return {s.vars[0]};
}

std::vector<std::pair<std::string, std::string>> GeneratorModel::parameters() const {
  std::vector<std::pair<std::string, std::string>> out{
      {"period", ticks(params_.period)}, {"count", capacity_text(params_.count)}};
  if (!params_.tags.empty()) {
    std::string joined;
    for (const auto& t : params_.tags) joined += (joined.empty() ? "" : ",") + t;
    out.emplace_back("tags", joined);
  }
  return out;
}

// ------------------------------------------------------------------ sync

Job merge_jobs(const std::vector<Job>& parts) {
  Job merged;
  merged.created = Time::infinity();
  std::set<std::string> tags;
  for (const auto& p : parts) {
    merged.ids.insert(merged.ids.end(), p.ids.begin(), p.ids.end());
    tags.insert(p.tags.begin(), p.tags.end());
    merged.created = std::min(merged.created, p.created);
  }
  std::sort(merged.ids.begin(), merged.ids.end());
  merged.tags.assign(tags.begin(), tags.end());
  if (parts.empty()) merged.created = Time::zero();
  return merged;
}

SyncModel::SyncModel(SyncParams params)
    : AtomicSpec(params.in_ports, params.out_ports, params.confluent), params_(std::move(params)) {
  if (params_.mode == SyncMode::fork && params_.in_ports.size() != 1) {
    throw std::invalid_argument("fork needs exactly one input port");
  }
  if (params_.mode == SyncMode::join && params_.out_ports.size() != 1) {
    throw std::invalid_argument("join needs exactly one output port");
  }
}

std::string_view SyncModel::type_name() const {
  return params_.mode == SyncMode::fork ? "fork" : "join";
}

std::size_t SyncModel::outbox() const {
  return params_.mode == SyncMode::fork ? 0 : params_.in_ports.size();
}

std::vector<std::string> SyncModel::phases() const {
  if (params_.mode == SyncMode::fork) return {"idle", "emitting"};
  return {"waiting", "emitting", "stuck"};
}

State SyncModel::initial_state() const {
  State s;
  s.phase = params_.mode == SyncMode::fork ? "idle" : "waiting";
  s.stores.resize(outbox() + 2);
  return s;
}

State SyncModel::schedule(State s) const {
  if (s.phase != "emitting" && !s.stores[outbox()].empty()) {
    s.phase = "emitting";
    s.sigma = params_.delay;
  }
  return s;
}

State SyncModel::internal(const State& s, TransitionContext&) const {
  State out = s;
  if (out.phase != "emitting") {
    out.sigma = Time::infinity();
    return out;
  }
  out.stores[outbox()] = std::move(out.stores[ready()]);
  out.stores[ready()].clear();
  if (out.stores[outbox()].empty()) {
    out.phase = params_.mode == SyncMode::fork ? "idle" : "waiting";
    out.sigma = Time::infinity();
  } else {
    out.sigma = params_.delay;
  }
  return out;
}

State SyncModel::external(const State& s, Time elapsed, const Bag& x,
                          TransitionContext& ctx) const {
  State out = advance(s, elapsed);
  if (out.phase == "stuck") return out;
  auto deliver = [&](Job job) {
    auto& target = out.phase == "emitting" ? out.stores[ready()] : out.stores[outbox()];
    target.push_back(std::move(job));
  };

  if (params_.mode == SyncMode::fork) {
    for (const auto& job : x.on_port(params_.in_ports.front())) deliver(job);
    return schedule(std::move(out));
  }

  for (const auto& m : x) {
    auto it = std::find(params_.in_ports.begin(), params_.in_ports.end(), m.port);
    if (it == params_.in_ports.end()) continue;
    auto& store = out.stores[static_cast<std::size_t>(it - params_.in_ports.begin())];
    if (params_.capacity && store.size() >= *params_.capacity + 1) {
      if (params_.overflow == Overflow::drop) {
        ctx.note("drop", "job " + m.job.label() + " dropped at full port " + m.port);
        continue;
      }
      ctx.note("stuck", "job " + m.job.label() + " arrived at full port " + m.port);
      out.phase = "stuck";
      out.sigma = Time::infinity();
      return out;
    }
    store.push_back(m.job);
  }
  const std::size_t n = params_.in_ports.size();
  while (std::all_of(out.stores.begin(), out.stores.begin() + static_cast<std::ptrdiff_t>(n),
                     [](const std::vector<Job>& st) { return !st.empty(); })) {
    std::vector<Job> parts;
    for (std::size_t i = 0; i < n; ++i) {
      parts.push_back(out.stores[i].front());
      out.stores[i].erase(out.stores[i].begin());
    }
    deliver(merge_jobs(parts));
  }
  return schedule(std::move(out));
}

Bag SyncModel::output(const State& s, TransitionContext&) const {
  Bag y;
  if (s.phase != "emitting") return y;
  for (const auto& job : s.stores[outbox()]) {
    for (const auto& port : params_.out_ports) y.add(port, job);
  }
  return y;
}

bool SyncModel::accepting(const State& s) const {
  if (s.phase == "stuck" || s.phase == "emitting") return false;
  return std::all_of(s.stores.begin(), s.stores.end(),
                     [](const std::vector<Job>& st) { return st.empty(); });
}

std::vector<VariableDomain> SyncModel::variable_domains() const {
  std::vector<VariableDomain> out;
  if (params_.mode == SyncMode::join) {
    for (const auto& p : params_.in_ports) {
      out.push_back({"store_" + p, 0, bound(params_.capacity, 1)});
    }
  }
  out.push_back({"outbox", 0, std::nullopt});
  out.push_back({"ready", 0, std::nullopt});
  return out;
}

std::vector<std::int64_t> SyncModel::variable_values(const State& s) const {
  std::vector<std::int64_t> out;
  for (const auto& st : s.stores) out.push_back(size_of(st));
  return out;
}

std::vector<std::pair<std::string, std::string>> SyncModel::parameters() const {
  std::vector<std::pair<std::string, std::string>> out{
      {"mode", params_.mode == SyncMode::fork ? "fork" : "join"},
      {"delay", ticks(params_.delay)},
      {"confluent", std::string(to_string(params_.confluent))}};
  if (params_.mode == SyncMode::join) {
    out.emplace_back("capacity", capacity_text(params_.capacity));
    out.emplace_back("overflow", std::string(to_string(params_.overflow)));
  }
  return out;
}

// ---------------------------------------------------------------- select

SelectModel::SelectModel(SelectParams params)
    : AtomicSpec(params.in_ports, params.out_ports, params.confluent), params_(std::move(params)) {
  if (params_.out_ports.empty()) throw std::invalid_argument("select needs an output port");
  if (params_.mode == SelectMode::decision && params_.in_ports.size() != 1) {
    throw std::invalid_argument("decision needs exactly one input port");
  }
  if (params_.mode == SelectMode::merge && params_.out_ports.size() != 1) {
    throw std::invalid_argument("merge needs exactly one output port");
  }
}

std::string_view SelectModel::type_name() const {
  return params_.mode == SelectMode::decision ? "decision" : "merge";
}

State SelectModel::initial_state() const {
  State s;
  s.phase = "idle";
  s.vars = {0};
  s.stores.resize(2 * lanes());
  return s;
}

bool SelectModel::nondeterministic() const {
  return params_.mode == SelectMode::decision && params_.policy == SelectPolicy::random &&
         !params_.seed;
}

std::optional<std::size_t> SelectModel::route(State& s, const Job& job,
                                              TransitionContext& ctx) const {
  if (params_.mode == SelectMode::merge) return 0;
  auto index_of = [&](const std::string& port) -> std::optional<std::size_t> {
    auto it = std::find(params_.out_ports.begin(), params_.out_ports.end(), port);
    if (it == params_.out_ports.end()) return std::nullopt;
    return static_cast<std::size_t>(it - params_.out_ports.begin());
  };
  switch (params_.policy) {
    case SelectPolicy::round_robin: {
      auto lane = static_cast<std::size_t>(s.vars[0]);
      s.vars[0] = static_cast<std::int64_t>((lane + 1) % lanes());
      return lane;
    }
    case SelectPolicy::random:
      return ctx.random_choice(lanes(), params_.seed);
    case SelectPolicy::guard:
      for (const auto& tag : job.tags) {
        auto g = params_.guards.find(tag);
        if (g != params_.guards.end()) {
          if (auto lane = index_of(g->second)) return lane;
        }
      }
      if (params_.fallback) {
        if (auto lane = index_of(*params_.fallback)) return lane;
      }
      ctx.note("routing-error", "no guard matches job " + job.label() + "; dropped");
      return std::nullopt;
  }
  return std::nullopt;
}

State SelectModel::external(const State& s, Time elapsed, const Bag& x,
                            TransitionContext& ctx) const {
  State out = advance(s, elapsed);
  const std::size_t offset = out.phase == "emitting" ? lanes() : 0;
  for (const auto& m : x) {
    if (std::find(params_.in_ports.begin(), params_.in_ports.end(), m.port) ==
        params_.in_ports.end()) {
      continue;
    }
    if (auto lane = route(out, m.job, ctx)) out.stores[offset + *lane].push_back(m.job);
  }
  if (out.phase == "idle") {
    bool any = std::any_of(out.stores.begin(), out.stores.begin() + static_cast<std::ptrdiff_t>(lanes()),
                           [](const std::vector<Job>& st) { return !st.empty(); });
    if (any) {
      out.phase = "emitting";
      out.sigma = params_.delay;
    }
  }
  return out;
}

State SelectModel::internal(const State& s, TransitionContext&) const {
  State out = s;
  bool any = false;
  for (std::size_t i = 0; i < lanes(); ++i) {
    out.stores[i] = std::move(out.stores[lanes() + i]);
    out.stores[lanes() + i].clear();
    any = any || !out.stores[i].empty();
  }
  out.phase = any ? "emitting" : "idle";
  out.sigma = any ? params_.delay : Time::infinity();
  return out;
}

Bag SelectModel::output(const State& s, TransitionContext&) const {
  Bag y;
  if (s.phase != "emitting") return y;
  for (std::size_t i = 0; i < lanes(); ++i) {
    for (const auto& job : s.stores[i]) y.add(params_.out_ports[i], job);
  }
  return y;
}

std::vector<VariableDomain> SelectModel::variable_domains() const {
  std::vector<VariableDomain> out;
  if (params_.mode == SelectMode::decision && params_.policy == SelectPolicy::round_robin) {
    out.push_back({"next", 0, static_cast<std::int64_t>(lanes()) - 1});
  }
  for (const auto& p : params_.out_ports) out.push_back({"outbox_" + p, 0, std::nullopt});
  for (const auto& p : params_.out_ports) out.push_back({"ready_" + p, 0, std::nullopt});
  return out;
}

std::vector<std::int64_t> SelectModel::variable_values(const State& s) const {
  std::vector<std::int64_t> out;
  if (params_.mode == SelectMode::decision && params_.policy == SelectPolicy::round_robin) {
    out.push_back(s.vars[0]);
  }
  for (const auto& st : s.stores) out.push_back(size_of(st));
  return out;
}

std::vector<std::pair<std::string, std::string>> SelectModel::parameters() const {
  std::vector<std::pair<std::string, std::string>> out{
      {"mode", params_.mode == SelectMode::decision ? "decision" : "merge"},
      {"delay", ticks(params_.delay)},
      {"confluent", std::string(to_string(params_.confluent))}};
  if (params_.mode == SelectMode::decision) {
    out.emplace_back("policy", std::string(to_string(params_.policy)));
    if (params_.seed) out.emplace_back("seed", std::to_string(*params_.seed));
    if (!params_.guards.empty()) {
      std::string joined;
      for (const auto& [tag, port] : params_.guards) {
        joined += (joined.empty() ? "" : ",") + tag + ":" + port;
      }
      out.emplace_back("guards", joined);
    }
    if (params_.fallback) out.emplace_back("default", *params_.fallback);
  }
  return out;
}

// -------------------------------------------------------------- absorber

AbsorberModel::AbsorberModel(bool transducer, Time window)
    : AtomicSpec({"in"}, {}, ConfluentOrder::ext_then_int),
      transducer_(transducer),
      window_(window) {}

State AbsorberModel::initial_state() const {
  State s;
  s.phase = "observing";
  s.stores.resize(1);
  return s;
}

State AbsorberModel::internal(const State& s, TransitionContext&) const {
  State out = s;
  out.sigma = Time::infinity();
  return out;
}

State AbsorberModel::external(const State& s, Time elapsed, const Bag& x,
                              TransitionContext& ctx) const {
  State out = advance(s, elapsed);
  for (const auto& job : x.on_port("in")) {
    out.stores[0].push_back(job);
    out.vars.push_back(static_cast<std::int64_t>(ctx.now().ticks()));
  }
  return out;
}

Bag AbsorberModel::output(const State&, TransitionContext&) const { return {}; }

void AbsorberModel::append_key(std::string& out, const State& s) const { out += s.phase; }

std::vector<std::pair<std::string, std::string>> AbsorberModel::parameters() const {
  if (!transducer_) return {};
  return {{"window", ticks(window_)}};
}

TransducerMetrics AbsorberModel::metrics(const State& s) const {
  TransducerMetrics m;
  for (std::size_t i = 0; i < s.stores[0].size(); ++i) {
    Time at(static_cast<Time::rep>(s.vars[i]));
    const Job& job = s.stores[0][i];
    m.arrivals.push_back({job, at});
    m.turnarounds.push_back(at - job.created);
  }
  auto window = std::max<Time::rep>(1, window_.is_finite() ? window_.ticks() : 1);
  m.throughput = static_cast<double>(m.arrivals.size()) / static_cast<double>(window);
  return m;
}

AtomicPtr make_action(ActionParams params) { return std::make_shared<ActionModel>(params); }
AtomicPtr make_generator(GeneratorParams params) {
  return std::make_shared<GeneratorModel>(std::move(params));
}
AtomicPtr make_sync(SyncParams params) { return std::make_shared<SyncModel>(std::move(params)); }
AtomicPtr make_select(SelectParams params) {
  return std::make_shared<SelectModel>(std::move(params));
}
AtomicPtr make_transducer(Time window) { return std::make_shared<AbsorberModel>(true, window); }
AtomicPtr make_sink() { return std::make_shared<AbsorberModel>(false, Time::zero()); }

}  // namespace actsim::devs
