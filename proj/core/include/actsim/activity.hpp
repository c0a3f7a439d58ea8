#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace actsim {

/// Position of a token or declaration in DSL source. Line and column are
/// 1-based; a default-constructed span means "no source location".
struct SourceSpan {
  std::uint32_t line = 0;
  std::uint32_t column = 0;
  std::uint32_t length = 0;

  bool valid() const { return line != 0; }
  auto operator<=>(const SourceSpan&) const = default;
};

}  // namespace actsim

namespace actsim::activity {

enum class NodeKind {
  initial,
  final,
  action,
  fork,
  join,
  decision,
  merge,
  call,
  generator,
  transducer,
};

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view text);

/// A parameter literal as written in the model. Numbers are kept in
/// canonical decimal form so they convert to ticks exactly at synthesis.
struct ParamValue {
  enum class Kind { number, identifier, string };

  Kind kind = Kind::identifier;
  std::string text;

  static ParamValue number(std::string text);
  static ParamValue identifier(std::string text);
  static ParamValue string(std::string text);

  bool operator==(const ParamValue&) const = default;
};

struct ActivityNode {
  std::string label;
  NodeKind kind = NodeKind::action;
  std::string call_target;  // only for NodeKind::call
  std::map<std::string, ParamValue> params;
  SourceSpan span;

  const ParamValue* param(std::string_view key) const;

  // Spans are presentation only and do not take part in equality.
  bool operator==(const ActivityNode& other) const {
    return label == other.label && kind == other.kind && call_target == other.call_target &&
           params == other.params;
  }
};

struct ActivityEdge {
  std::string source;
  std::string target;
  SourceSpan span;

  bool operator==(const ActivityEdge& other) const {
    return source == other.source && target == other.target;
  }
};

struct Activity {
  std::string name;
  std::vector<ActivityNode> nodes;
  std::vector<ActivityEdge> edges;
  SourceSpan span;

  const ActivityNode* find_node(std::string_view label) const;
  ActivityNode* find_node(std::string_view label);

  bool operator==(const Activity& other) const {
    return name == other.name && nodes == other.nodes && edges == other.edges;
  }
};

struct Behavior {
  std::string name;
  std::vector<Activity> activities;
  SourceSpan span;

  bool operator==(const Behavior& other) const {
    return name == other.name && activities == other.activities;
  }
};

/// Hierarchical activity model: behaviors own activities, and `call` nodes
/// refer to other activities by name. `root` names the behavior whose first
/// activity is the entry point.
struct ActivityModel {
  std::vector<Behavior> behaviors;
  std::string root;

  const Behavior* find_behavior(std::string_view name) const;
  const Activity* find_activity(std::string_view name) const;
  const Activity* root_activity() const;

  bool operator==(const ActivityModel&) const = default;
};

enum class Severity { error, warning };

std::string_view to_string(Severity severity);

struct Location {
  std::string activity;
  std::string element;  // node label or "source->target"
  SourceSpan span;

  auto operator<=>(const Location&) const = default;
};

struct Diagnostic {
  Severity severity = Severity::error;
  std::string rule;
  std::string message;
  Location location;

  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(const Diagnostic& diagnostic);

/// Published rule identifiers. Every diagnostic carries one of these.
namespace rules {
inline constexpr std::string_view call_cycle = "call-cycle";
inline constexpr std::string_view call_target = "call-target";
inline constexpr std::string_view control_degree = "control-degree";
inline constexpr std::string_view dangling_edge = "dangling-edge";
inline constexpr std::string_view duplicate_activity = "duplicate-activity";
inline constexpr std::string_view duplicate_behavior = "duplicate-behavior";
inline constexpr std::string_view empty_behavior = "empty-behavior";
inline constexpr std::string_view final_out_degree = "final-out-degree";
inline constexpr std::string_view generator_input = "generator-input";
inline constexpr std::string_view initial_count = "initial-count";
inline constexpr std::string_view initial_in_degree = "initial-in-degree";
inline constexpr std::string_view param_invalid = "param-invalid";
inline constexpr std::string_view param_unknown = "param-unknown";
inline constexpr std::string_view root_missing = "root-missing";
inline constexpr std::string_view self_loop = "self-loop";
inline constexpr std::string_view unique_label = "unique-label";
}  // namespace rules

const std::vector<std::string_view>& rule_catalog();

/// Checks every structural and parameter rule. The result is sorted by rule
/// id, then location; an empty list means the model is well-formed.
std::vector<Diagnostic> validate_model(const ActivityModel& model);

/// Checks a single activity in isolation (no call-target resolution).
std::vector<Diagnostic> validate_activity(const Activity& activity);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Raised by flatten_hierarchy when calls form a cycle. `cycle` lists
/// activity names with the first repeated at the end (A, B, A).
class CallCycleError : public std::runtime_error {
 public:
  explicit CallCycleError(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

/// Returns the call cycle reachable from `activity`, if any.
std::optional<std::vector<std::string>> find_call_cycle(const ActivityModel& model,
                                                        std::string_view activity);

/// Inlines every call node of the root activity. Callee nodes are prefixed
/// with "<call label>." and the callee's initial/final nodes are fused with
/// the call's incoming/outgoing edges.
Activity flatten_hierarchy(const ActivityModel& model);

/// Wraps a single activity as a one-behavior model.
ActivityModel single_activity_model(Activity activity, std::string behavior_name = "Main");

}  // namespace actsim::activity
