#include "actsim/synthesis.hpp"

#include <algorithm>
#include <sstream>

namespace actsim {

using activity::ActivityNode;
using activity::NodeKind;

std::string_view to_string(OverflowSite site) {
  switch (site) {
    case OverflowSite::action: return "action";
    case OverflowSite::join: return "join";
    case OverflowSite::both: return "both";
  }
  return "action";
}

std::optional<OverflowSite> overflow_site_from_string(std::string_view text) {
  if (text == "action") return OverflowSite::action;
  if (text == "join") return OverflowSite::join;
  if (text == "both") return OverflowSite::both;
  return std::nullopt;
}

SynthesisError::SynthesisError(std::string node, const std::string& message)
    : std::invalid_argument("node '" + node + "': " + message), node_(std::move(node)) {}

std::string source_port(const ActivityNode& node, const std::string& target) {
  if (node.kind == NodeKind::fork || node.kind == NodeKind::decision) return "out_" + target;
  return "out";
}

std::string target_port(const ActivityNode& node, const std::string& source) {
  if (node.kind == NodeKind::join || node.kind == NodeKind::merge) return "in_" + source;
  return "in";
}

namespace {

class Builder {
 public:
  Builder(const activity::Activity& flat, const SemanticsConfig& config)
      : flat_(flat), config_(config) {}

  devs::CoupledSpec run() {
    devs::CoupledSpec spec;
    spec.name = flat_.name;
    for (const auto& node : flat_.nodes) {
      if (node.kind == NodeKind::initial) continue;
      spec.components.push_back({node.label, component(node)});
    }
    for (const auto& e : flat_.edges) {
      const ActivityNode* from = flat_.find_node(e.source);
      const ActivityNode* to = flat_.find_node(e.target);
      if (from == nullptr || to == nullptr) {
        throw SynthesisError(from == nullptr ? e.source : e.target, "edge endpoint does not exist");
      }
      if (from->kind == NodeKind::initial) continue;
      if (to->kind == NodeKind::initial) {
        throw SynthesisError(to->label, "initial node cannot receive flow");
      }
      spec.couplings.push_back(
          {{from->label, source_port(*from, to->label)}, {to->label, target_port(*to, from->label)}});
    }
    devs::validate_coupled(spec);
    return spec;
  }

 private:
  std::vector<std::string> successors(const ActivityNode& node) const {
    std::vector<std::string> out;
    for (const auto& e : flat_.edges) {
      if (e.source == node.label) out.push_back(e.target);
    }
    return out;
  }

  std::vector<std::string> predecessors(const ActivityNode& node) const {
    std::vector<std::string> out;
    for (const auto& e : flat_.edges) {
      if (e.target != node.label) continue;
      const ActivityNode* from = flat_.find_node(e.source);
      if (from != nullptr && from->kind != NodeKind::initial) out.push_back(e.source);
    }
    return out;
  }

  Time time_param(const ActivityNode& node, std::string_view key, Time fallback) const {
    const auto* p = node.param(key);
    if (p == nullptr) return fallback;
    auto t = decimal_to_ticks(p->text, config_.tick_scale);
    if (!t) {
      throw SynthesisError(node.label, "parameter '" + std::string(key) + "' = " + p->text +
                                           " is not a whole number of ticks at scale " +
                                           std::to_string(config_.tick_scale));
    }
    return Time(*t);
  }

  std::optional<std::uint64_t> count_param(const ActivityNode& node, std::string_view key) const {
    const auto* p = node.param(key);
    if (p == nullptr) return std::nullopt;
    try {
      return std::stoull(p->text);
    } catch (const std::exception&) {
      throw SynthesisError(node.label, "parameter '" + std::string(key) + "' is not an integer");
    }
  }

  devs::ConfluentOrder confluent(const ActivityNode& node) const {
    if (config_.confluent) return *config_.confluent;
    if (const auto* p = node.param("confluent")) {
      if (auto c = devs::confluent_from_string(p->text)) return *c;
    }
    return config_.default_confluent;
  }

  devs::Overflow overflow(const ActivityNode& node, bool overridden) const {
    if (overridden && config_.overflow) return *config_.overflow;
    if (const auto* p = node.param("overflow")) {
      if (auto o = devs::overflow_from_string(p->text)) return *o;
    }
    return devs::Overflow::drop;
  }

  std::optional<std::uint64_t> capacity(const ActivityNode& node, bool overridden) const {
    if (overridden && config_.capacity) return config_.capacity;
    return count_param(node, "capacity");
  }

  bool at_site(NodeKind kind) const {
    if (config_.site == OverflowSite::both) return true;
    return (config_.site == OverflowSite::action) == (kind == NodeKind::action);
  }

  devs::AtomicPtr component(const ActivityNode& node) const {
    const Time delay = time_param(node, "delay", config_.control_delay);
    switch (node.kind) {
      case NodeKind::action: {
        bool o = at_site(NodeKind::action);
        return devs::make_action({time_param(node, "duration", Time::zero()), capacity(node, o),
                                  overflow(node, o), confluent(node)});
      }
      case NodeKind::generator: {
        devs::GeneratorParams p;
        p.period = time_param(node, "period", Time::zero());
        if (p.period == Time::zero()) throw SynthesisError(node.label, "period must be positive");
        p.count = count_param(node, "count");
        if (const auto* tags = node.param("tags")) {
          std::stringstream ss(tags->text);
          for (std::string tag; std::getline(ss, tag, ',');) {
            if (!tag.empty()) p.tags.push_back(tag);
          }
        }
        return devs::make_generator(std::move(p));
      }
      case NodeKind::transducer:
        if (!successors(node).empty()) {
          throw SynthesisError(node.label, "transducer has no output port");
        }
        return devs::make_transducer(time_param(node, "window", Time(1)));
      case NodeKind::final:
        return devs::make_sink();
      case NodeKind::fork:
      case NodeKind::join: {
        devs::SyncParams p;
        p.mode = node.kind == NodeKind::fork ? devs::SyncMode::fork : devs::SyncMode::join;
        p.delay = delay;
        p.confluent = confluent(node);
        if (p.mode == devs::SyncMode::fork) {
          p.in_ports = {"in"};
          for (const auto& t : successors(node)) p.out_ports.push_back(source_port(node, t));
        } else {
          for (const auto& s : predecessors(node)) p.in_ports.push_back(target_port(node, s));
          p.out_ports = {"out"};
          bool o = at_site(NodeKind::join);
          p.capacity = capacity(node, o);
          p.overflow = overflow(node, o);
        }
        return devs::make_sync(std::move(p));
      }
      case NodeKind::decision:
      case NodeKind::merge: {
        devs::SelectParams p;
        p.delay = delay;
        p.confluent = confluent(node);
        if (node.kind == NodeKind::merge) {
          p.mode = devs::SelectMode::merge;
          for (const auto& s : predecessors(node)) p.in_ports.push_back(target_port(node, s));
          p.out_ports = {"out"};
          return devs::make_select(std::move(p));
        }
        p.mode = devs::SelectMode::decision;
        p.in_ports = {"in"};
        for (const auto& t : successors(node)) p.out_ports.push_back(source_port(node, t));
        if (p.out_ports.empty()) throw SynthesisError(node.label, "decision has no successor");
        if (const auto* policy = node.param("policy")) {
          if (policy->text == "random") p.policy = devs::SelectPolicy::random;
          if (policy->text == "guard") p.policy = devs::SelectPolicy::guard;
        }
        p.seed = count_param(node, "seed");
        if (const auto* guards = node.param("guards")) {
          std::stringstream ss(guards->text);
          for (std::string item; std::getline(ss, item, ',');) {
            auto colon = item.find(':');
            if (colon == std::string::npos) {
              throw SynthesisError(node.label, "guard '" + item + "' is not tag:target");
            }
            p.guards[item.substr(0, colon)] = source_port(node, item.substr(colon + 1));
          }
        }
        if (const auto* dflt = node.param("default")) p.fallback = source_port(node, dflt->text);
        return devs::make_select(std::move(p));
      }
      case NodeKind::call:
        throw SynthesisError(node.label, "call nodes must be flattened before synthesis");
      case NodeKind::initial:
        break;
    }
    throw SynthesisError(node.label, "unsupported node kind");
  }

  const activity::Activity& flat_;
  const SemanticsConfig& config_;
};

}  // namespace

devs::CoupledSpec synthesize(const activity::Activity& flat, const SemanticsConfig& config) {
  return Builder(flat, config).run();
}

devs::CoupledSpec synthesize_model(const activity::ActivityModel& model,
                                   const SemanticsConfig& config) {
  for (const auto& d : activity::validate_model(model)) {
    if (d.severity == activity::Severity::error) {
      throw std::invalid_argument(activity::to_string(d));
    }
  }
  return synthesize(activity::flatten_hierarchy(model), config);
}

}  // namespace actsim
