#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "actsim/activity.hpp"

namespace actsim::activity {

namespace {

std::string join_path(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += "->";
    out += names[i];
  }
  return out;
}

bool cycle_dfs(const ActivityModel& model, const Activity& activity,
               std::vector<std::string>& stack, std::set<std::string>& finished,
               std::vector<std::string>& cycle) {
  stack.push_back(activity.name);
  for (const auto& node : activity.nodes) {
    if (node.kind != NodeKind::call) continue;
    auto on_stack = std::find(stack.begin(), stack.end(), node.call_target);
    if (on_stack != stack.end()) {
      cycle.assign(on_stack, stack.end());
      cycle.push_back(node.call_target);
      return true;
    }
    if (finished.contains(node.call_target)) continue;
    const Activity* callee = model.find_activity(node.call_target);
    if (callee == nullptr) continue;
    if (cycle_dfs(model, *callee, stack, finished, cycle)) return true;
  }
  stack.pop_back();
  finished.insert(activity.name);
  return false;
}

class Flattener {
 public:
  explicit Flattener(const ActivityModel& model) : model_(model) {}

  Activity run(const Activity& root) {
    std::vector<std::string> stack;
    expand(root, "", true, stack);
    pre_contract_ = edges_;
    contract();
    retarget();

    Activity flat;
    flat.name = root.name;
    flat.span = root.span;
    for (auto& node : nodes_) {
      if (!passthrough_.contains(node.label)) flat.nodes.push_back(std::move(node));
    }
    flat.edges = std::move(edges_);
    return flat;
  }

 private:
  struct Retarget {
    std::size_t node;
    std::unordered_map<std::string, std::vector<std::string>> candidates;
  };

  struct Boundary {
    std::vector<std::string> entries;
    std::vector<std::string> exits;
  };

  Boundary expand(const Activity& activity, const std::string& prefix, bool is_root,
                  std::vector<std::string>& stack) {
    stack.push_back(activity.name);
    Boundary boundary;
    std::unordered_map<std::string, Boundary> calls;
    std::vector<std::size_t> decisions;

    for (const auto& node : activity.nodes) {
      if (node.kind == NodeKind::call) {
        if (std::find(stack.begin(), stack.end(), node.call_target) != stack.end()) {
          std::vector<std::string> cycle(
              std::find(stack.begin(), stack.end(), node.call_target), stack.end());
          cycle.push_back(node.call_target);
          throw CallCycleError(std::move(cycle));
        }
        const Activity* callee = model_.find_activity(node.call_target);
        if (callee == nullptr) {
          throw std::invalid_argument("call node '" + node.label + "' targets unknown activity '" +
                                      node.call_target + "'");
        }
        calls.emplace(node.label, expand(*callee, prefix + node.label + ".", false, stack));
        continue;
      }
      ActivityNode copy = node;
      copy.label = prefix + node.label;
      if (!is_root && (node.kind == NodeKind::initial || node.kind == NodeKind::final)) {
        passthrough_.insert(copy.label);
        (node.kind == NodeKind::initial ? boundary.entries : boundary.exits)
            .push_back(copy.label);
      }
      if (node.kind == NodeKind::decision) decisions.push_back(nodes_.size());
      nodes_.push_back(std::move(copy));
    }

    for (const auto& edge : activity.edges) {
      auto sources = endpoint(edge.source, prefix, calls, false);
      auto targets = endpoint(edge.target, prefix, calls, true);
      for (const auto& s : sources) {
        for (const auto& t : targets) edges_.push_back({s, t, edge.span});
      }
    }
    for (std::size_t index : decisions) {
      Retarget r{index, {}};
      for (const auto& label : referenced_branches(nodes_[index])) {
        r.candidates[label] = endpoint(label, prefix, calls, true);
      }
      retargets_.push_back(std::move(r));
    }
    stack.pop_back();
    return boundary;
  }

  static std::vector<std::string> endpoint(const std::string& label, const std::string& prefix,
                                           const std::unordered_map<std::string, Boundary>& calls,
                                           bool incoming) {
    auto it = calls.find(label);
    if (it == calls.end()) return {prefix + label};
    return incoming ? it->second.entries : it->second.exits;
  }

  // Branch labels named by a decision's default and guards parameters.
  static std::vector<std::string> referenced_branches(const ActivityNode& node) {
    std::vector<std::string> out;
    if (const ParamValue* dflt = node.param("default")) out.push_back(dflt->text);
    if (const ParamValue* guards = node.param("guards")) {
      std::stringstream ss(guards->text);
      for (std::string item; std::getline(ss, item, ',');) {
        auto colon = item.find(':');
        if (colon != std::string::npos) out.push_back(item.substr(colon + 1));
      }
    }
    return out;
  }

  std::string resolve(const std::string& label, std::set<std::string>& seen) const {
    if (!passthrough_.contains(label)) return label;
    if (!seen.insert(label).second) return {};
    for (const auto& e : pre_contract_) {
      if (e.source != label) continue;
      if (auto r = resolve(e.target, seen); !r.empty()) return r;
    }
    return {};
  }

  std::string rename(const Retarget& r, const std::string& label) const {
    auto it = r.candidates.find(label);
    if (it == r.candidates.end()) return label;
    for (const auto& c : it->second) {
      std::set<std::string> seen;
      if (auto resolved = resolve(c, seen); !resolved.empty()) return resolved;
    }
    return label;
  }

  void retarget() {
    for (const auto& r : retargets_) {
      ActivityNode& node = nodes_[r.node];
      if (auto it = node.params.find("default"); it != node.params.end()) {
        it->second.text = rename(r, it->second.text);
      }
      if (auto it = node.params.find("guards"); it != node.params.end()) {
        std::stringstream ss(it->second.text);
        std::string rewritten;
        for (std::string item; std::getline(ss, item, ',');) {
          if (!rewritten.empty()) rewritten += ',';
          auto colon = item.find(':');
          rewritten += colon == std::string::npos
                           ? item
                           : item.substr(0, colon + 1) + rename(r, item.substr(colon + 1));
        }
        it->second.text = std::move(rewritten);
      }
    }
  }

  void contract() {
    for (const auto& node : nodes_) {
      if (!passthrough_.contains(node.label)) continue;
      const std::string& p = node.label;
      std::vector<ActivityEdge> outs;
      for (const auto& e : edges_) {
        if (e.source == p && e.target != p) outs.push_back(e);
      }
      std::vector<ActivityEdge> next;
      for (const auto& e : edges_) {
        if (e.source == p) continue;
        if (e.target == p) {
          for (const auto& o : outs) {
            if (e.source != o.target) next.push_back({e.source, o.target, e.span});
          }
          continue;
        }
        next.push_back(e);
      }
      edges_ = std::move(next);
    }
    std::vector<ActivityEdge> unique;
    std::set<std::pair<std::string, std::string>> seen;
    for (auto& e : edges_) {
      if (seen.emplace(e.source, e.target).second) unique.push_back(std::move(e));
    }
    edges_ = std::move(unique);
  }

  const ActivityModel& model_;
  std::vector<ActivityNode> nodes_;
  std::vector<ActivityEdge> pre_contract_;
  std::vector<Retarget> retargets_;
  std::vector<ActivityEdge> edges_;
  std::unordered_set<std::string> passthrough_;
};

}  // namespace

CallCycleError::CallCycleError(std::vector<std::string> cycle)
    : std::runtime_error("call cycle " + join_path(cycle)), cycle_(std::move(cycle)) {}

std::optional<std::vector<std::string>> find_call_cycle(const ActivityModel& model,
                                                        std::string_view activity) {
  const Activity* start = model.find_activity(activity);
  if (start == nullptr) return std::nullopt;
  std::vector<std::string> stack;
  std::set<std::string> finished;
  std::vector<std::string> cycle;
  if (cycle_dfs(model, *start, stack, finished, cycle)) return cycle;
  return std::nullopt;
}

Activity flatten_hierarchy(const ActivityModel& model) {
  const Activity* root = model.root_activity();
  if (root == nullptr) {
    throw std::invalid_argument("model has no root activity (root behavior '" + model.root +
                                "')");
  }
  return Flattener(model).run(*root);
}

}  // namespace actsim::activity
