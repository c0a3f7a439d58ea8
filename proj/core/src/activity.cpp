#include "actsim/activity.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>

#include "actsim/time.hpp"

namespace actsim::activity {

namespace {

constexpr std::array<std::pair<NodeKind, std::string_view>, 10> kKindNames{{
    {NodeKind::initial, "initial"},
    {NodeKind::final, "final"},
    {NodeKind::action, "action"},
    {NodeKind::fork, "fork"},
    {NodeKind::join, "join"},
    {NodeKind::decision, "decision"},
    {NodeKind::merge, "merge"},
    {NodeKind::call, "call"},
    {NodeKind::generator, "generator"},
    {NodeKind::transducer, "transducer"},
}};

enum class ParamType {
  non_negative_number,
  positive_number,
  non_negative_integer,
  text,
  overflow,
  confluent,
  policy,
  identifier,
};

struct ParamRule {
  std::string_view key;
  ParamType type;
};

std::vector<ParamRule> param_rules(NodeKind kind) {
  const ParamRule confluent{"confluent", ParamType::confluent};
  const ParamRule delay{"delay", ParamType::non_negative_number};
  switch (kind) {
    case NodeKind::action:
      return {{"duration", ParamType::non_negative_number},
              {"capacity", ParamType::non_negative_integer},
              {"overflow", ParamType::overflow},
              confluent};
    case NodeKind::generator:
      return {{"period", ParamType::positive_number},
              {"count", ParamType::non_negative_integer},
              {"tags", ParamType::text},
              confluent};
    case NodeKind::transducer:
      return {{"window", ParamType::positive_number}};
    case NodeKind::fork:
    case NodeKind::merge:
      return {delay, confluent};
    case NodeKind::join:
      return {delay,
              {"capacity", ParamType::non_negative_integer},
              {"overflow", ParamType::overflow},
              confluent};
    case NodeKind::decision:
      return {delay,
              confluent,
              {"policy", ParamType::policy},
              {"seed", ParamType::non_negative_integer},
              {"guards", ParamType::text},
              {"default", ParamType::identifier}};
    case NodeKind::initial:
    case NodeKind::final:
    case NodeKind::call:
      return {};
  }
  return {};
}

bool is_non_negative_integer(std::string_view text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

std::optional<std::string> check_param(ParamType type, const ParamValue& value) {
  using K = ParamValue::Kind;
  auto want_identifier = [&](std::initializer_list<std::string_view> allowed,
                             std::string_view what) -> std::optional<std::string> {
    if (value.kind == K::identifier &&
        std::find(allowed.begin(), allowed.end(), value.text) != allowed.end()) {
      return std::nullopt;
    }
    std::string msg = "expected " + std::string(what) + " (";
    bool first = true;
    for (auto a : allowed) {
      if (!first) msg += ", ";
      msg += a;
      first = false;
    }
    return msg + ")";
  };

  switch (type) {
    case ParamType::non_negative_number:
      if (value.kind != K::number || value.text.starts_with('-'))
        return "expected a non-negative number";
      return std::nullopt;
    case ParamType::positive_number:
      if (value.kind != K::number || value.text.starts_with('-') || value.text == "0")
        return "expected a positive number";
      return std::nullopt;
    case ParamType::non_negative_integer:
      if (value.kind != K::number || !is_non_negative_integer(value.text))
        return "expected a non-negative integer";
      return std::nullopt;
    case ParamType::text:
      if (value.kind != K::string) return "expected a quoted string";
      return std::nullopt;
    case ParamType::overflow:
      return want_identifier({"drop", "stuck"}, "overflow policy");
    case ParamType::confluent:
      return want_identifier({"ext_then_int", "int_then_ext"}, "confluent order");
    case ParamType::policy:
      return want_identifier({"round_robin", "random", "guard"}, "decision policy");
    case ParamType::identifier:
      if (value.kind != K::identifier) return "expected an identifier";
      return std::nullopt;
  }
  return std::nullopt;
}

std::string edge_element(const ActivityEdge& e) { return e.source + "->" + e.target; }

void sort_diagnostics(std::vector<Diagnostic>& out) {
  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.rule != b.rule) return a.rule < b.rule;
    return a.location < b.location;
  });
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<NodeKind> node_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

ParamValue ParamValue::number(std::string text) {
  auto canonical = canonical_decimal(text);
  return {Kind::number, canonical ? *canonical : std::move(text)};
}
ParamValue ParamValue::identifier(std::string text) { return {Kind::identifier, std::move(text)}; }
ParamValue ParamValue::string(std::string text) { return {Kind::string, std::move(text)}; }

const ParamValue* ActivityNode::param(std::string_view key) const {
  auto it = params.find(std::string(key));
  return it == params.end() ? nullptr : &it->second;
}

const ActivityNode* Activity::find_node(std::string_view label) const {
  for (const auto& n : nodes) {
    if (n.label == label) return &n;
  }
  return nullptr;
}

ActivityNode* Activity::find_node(std::string_view label) {
  for (auto& n : nodes) {
    if (n.label == label) return &n;
  }
  return nullptr;
}

const Behavior* ActivityModel::find_behavior(std::string_view name) const {
  for (const auto& b : behaviors) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const Activity* ActivityModel::find_activity(std::string_view name) const {
  for (const auto& b : behaviors) {
    for (const auto& a : b.activities) {
      if (a.name == name) return &a;
    }
  }
  return nullptr;
}

const Activity* ActivityModel::root_activity() const {
  const Behavior* b = find_behavior(root);
  if (b == nullptr || b->activities.empty()) return nullptr;
  return &b->activities.front();
}

std::string_view to_string(Severity severity) {
  return severity == Severity::error ? "error" : "warning";
}

std::string to_string(const Diagnostic& d) {
  std::string out;
  if (d.location.span.valid()) {
    out += std::to_string(d.location.span.line) + ":" + std::to_string(d.location.span.column) +
           ": ";
  }
  out += std::string(to_string(d.severity)) + " [" + d.rule + "] ";
  if (!d.location.activity.empty()) out += d.location.activity;
  if (!d.location.element.empty()) out += "/" + d.location.element;
  out += ": " + d.message;
  return out;
}

const std::vector<std::string_view>& rule_catalog() {
  static const std::vector<std::string_view> catalog = {
      rules::call_cycle,         rules::call_target,       rules::control_degree,
      rules::dangling_edge,      rules::duplicate_activity, rules::duplicate_behavior,
      rules::empty_behavior,     rules::final_out_degree,  rules::generator_input,
      rules::initial_count,      rules::initial_in_degree, rules::param_invalid,
      rules::param_unknown,      rules::root_missing,      rules::self_loop,
      rules::unique_label,
  };
  return catalog;
}

std::vector<Diagnostic> validate_activity(const Activity& activity) {
  std::vector<Diagnostic> out;
  auto report = [&](Severity sev, std::string_view rule, std::string element, SourceSpan span,
                    std::string message) {
    out.push_back({sev, std::string(rule), std::move(message),
                   {activity.name, std::move(element), span}});
  };

  std::set<std::string> seen;
  std::unordered_map<std::string, const ActivityNode*> by_label;
  for (const auto& node : activity.nodes) {
    if (!seen.insert(node.label).second) {
      report(Severity::error, rules::unique_label, node.label, node.span,
             "label '" + node.label + "' is already used in activity '" + activity.name + "'");
      continue;
    }
    by_label.emplace(node.label, &node);
  }

  std::unordered_map<std::string, int> in_degree;
  std::unordered_map<std::string, int> out_degree;
  for (const auto& edge : activity.edges) {
    bool ok = true;
    for (const std::string* end : {&edge.source, &edge.target}) {
      if (!by_label.contains(*end)) {
        report(Severity::error, rules::dangling_edge, edge_element(edge), edge.span,
               "edge endpoint '" + *end + "' is not a declared node");
        ok = false;
      }
    }
    if (edge.source == edge.target) {
      report(Severity::error, rules::self_loop, edge_element(edge), edge.span,
             "edge connects '" + edge.source + "' to itself");
    }
    if (!ok) continue;
    ++out_degree[edge.source];
    ++in_degree[edge.target];
    const ActivityNode* target = by_label.at(edge.target);
    const ActivityNode* source = by_label.at(edge.source);
    if (target->kind == NodeKind::generator && source->kind != NodeKind::initial) {
      report(Severity::error, rules::generator_input, edge_element(edge), edge.span,
             "generator '" + target->label + "' has no input port");
    }
  }

  int initials = 0;
  for (const auto& [label, node] : by_label) {
    (void)label;
    if (node->kind == NodeKind::initial) ++initials;
  }
  if (initials != 1) {
    report(Severity::error, rules::initial_count, "", activity.span,
           "expected exactly one initial node, found " + std::to_string(initials));
  }

  for (const auto& node : activity.nodes) {
    if (by_label.at(node.label) != &node) continue;
    int in = in_degree[node.label];
    int outd = out_degree[node.label];
    switch (node.kind) {
      case NodeKind::initial:
        if (in > 0)
          report(Severity::error, rules::initial_in_degree, node.label, node.span,
                 "initial node has " + std::to_string(in) + " incoming edge(s)");
        break;
      case NodeKind::final:
        if (outd > 0)
          report(Severity::error, rules::final_out_degree, node.label, node.span,
                 "final node has " + std::to_string(outd) + " outgoing edge(s)");
        break;
      case NodeKind::fork:
      case NodeKind::decision:
      case NodeKind::join:
      case NodeKind::merge: {
        bool fans_out = node.kind == NodeKind::fork || node.kind == NodeKind::decision;
        int degree = fans_out ? outd : in;
        std::string which = fans_out ? "out-degree" : "in-degree";
        if (degree == 0) {
          report(Severity::error, rules::control_degree, node.label, node.span,
                 std::string(to_string(node.kind)) + " has " + which + " 0");
        } else if (degree == 1) {
          report(Severity::warning, rules::control_degree, node.label, node.span,
                 std::string(to_string(node.kind)) + " has " + which +
                     " 1 and degenerates to a pass-through");
        }
        break;
      }
      default:
        break;
    }

    if (node.kind == NodeKind::call && node.call_target.empty()) {
      report(Severity::error, rules::call_target, node.label, node.span,
             "call node has no target activity");
    }

    auto allowed = param_rules(node.kind);
    for (const auto& [key, value] : node.params) {
      auto rule = std::find_if(allowed.begin(), allowed.end(),
                               [&](const ParamRule& r) { return r.key == key; });
      if (rule == allowed.end()) {
        report(Severity::warning, rules::param_unknown, node.label, node.span,
               "parameter '" + key + "' is not used by " + std::string(to_string(node.kind)) +
                   " nodes");
        continue;
      }
      if (auto problem = check_param(rule->type, value)) {
        report(Severity::error, rules::param_invalid, node.label, node.span,
               "parameter '" + key + "' = '" + value.text + "': " + *problem);
      }
    }
    if (node.kind == NodeKind::generator && node.param("period") == nullptr) {
      report(Severity::error, rules::param_invalid, node.label, node.span,
             "generator requires a 'period' parameter");
    }
    if (node.kind == NodeKind::decision) {
      const ParamValue* policy = node.param("policy");
      if (policy != nullptr && policy->text == "guard" && node.param("guards") == nullptr) {
        report(Severity::error, rules::param_invalid, node.label, node.span,
               "guard policy requires a 'guards' parameter");
      }
      if (const ParamValue* dflt = node.param("default")) {
        bool is_successor = std::any_of(activity.edges.begin(), activity.edges.end(),
                                        [&](const ActivityEdge& e) {
                                          return e.source == node.label && e.target == dflt->text;
                                        });
        if (!is_successor) {
          report(Severity::error, rules::param_invalid, node.label, node.span,
                 "default branch '" + dflt->text + "' is not a successor of the decision");
        }
      }
    }
  }

  sort_diagnostics(out);
  return out;
}

std::vector<Diagnostic> validate_model(const ActivityModel& model) {
  std::vector<Diagnostic> out;

  if (model.find_behavior(model.root) == nullptr) {
    out.push_back({Severity::error, std::string(rules::root_missing),
                   "root behavior '" + model.root + "' is not defined",
                   {"", model.root, {}}});
  }

  std::set<std::string> behavior_names;
  std::set<std::string> activity_names;
  for (const auto& behavior : model.behaviors) {
    if (!behavior_names.insert(behavior.name).second) {
      out.push_back({Severity::error, std::string(rules::duplicate_behavior),
                     "behavior '" + behavior.name + "' is declared more than once",
                     {"", behavior.name, behavior.span}});
    }
    if (behavior.activities.empty()) {
      out.push_back({Severity::error, std::string(rules::empty_behavior),
                     "behavior '" + behavior.name + "' contains no activity",
                     {"", behavior.name, behavior.span}});
    }
    for (const auto& activity : behavior.activities) {
      if (!activity_names.insert(activity.name).second) {
        out.push_back({Severity::error, std::string(rules::duplicate_activity),
                       "activity '" + activity.name + "' is declared more than once",
                       {activity.name, "", activity.span}});
      }
      auto local = validate_activity(activity);
      out.insert(out.end(), local.begin(), local.end());

      for (const auto& node : activity.nodes) {
        if (node.kind != NodeKind::call || node.call_target.empty()) continue;
        const Activity* callee = model.find_activity(node.call_target);
        if (callee == nullptr) {
          out.push_back({Severity::error, std::string(rules::call_target),
                         "call target '" + node.call_target + "' is not a declared activity",
                         {activity.name, node.label, node.span}});
          continue;
        }
        // Inlining wires the call's predecessors to the callee's entry nodes.
        bool has_inputs = std::any_of(activity.edges.begin(), activity.edges.end(),
                                      [&](const ActivityEdge& e) { return e.target == node.label; });
        for (const auto& e : callee->edges) {
          const ActivityNode* from = callee->find_node(e.source);
          const ActivityNode* to = callee->find_node(e.target);
          if (has_inputs && from && to && from->kind == NodeKind::initial &&
              to->kind == NodeKind::generator) {
            out.push_back({Severity::error, std::string(rules::generator_input),
                           "call '" + node.label + "' would feed generator '" + to->label +
                               "' of activity '" + callee->name + "'",
                           {activity.name, node.label, node.span}});
          }
        }
      }
    }
  }

  // Report each distinct cycle once, anchored at its lexicographically
  // smallest member.
  std::set<std::vector<std::string>> cycles;
  for (const auto& name : activity_names) {
    auto cycle = find_call_cycle(model, name);
    if (!cycle) continue;
    std::vector<std::string> members(cycle->begin(), cycle->end() - 1);
    auto smallest = std::min_element(members.begin(), members.end());
    std::rotate(members.begin(), smallest, members.end());
    members.push_back(members.front());
    if (!cycles.insert(members).second) continue;
    std::string path;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i) path += "->";
      path += members[i];
    }
    const Activity* anchor = model.find_activity(members.front());
    out.push_back({Severity::error, std::string(rules::call_cycle), "call cycle " + path,
                   {members.front(), "", anchor ? anchor->span : SourceSpan{}}});
  }

  sort_diagnostics(out);
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

ActivityModel single_activity_model(Activity activity, std::string behavior_name) {
  ActivityModel model;
  Behavior behavior;
  behavior.name = std::move(behavior_name);
  behavior.activities.push_back(std::move(activity));
  model.root = behavior.name;
  model.behaviors.push_back(std::move(behavior));
  return model;
}

}  // namespace actsim::activity
