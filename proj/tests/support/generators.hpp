#pragma once

// Hand-rolled random generators for property tests.

#include <random>
#include <string>
#include <vector>

#include "actsim/activity.hpp"

namespace gen {

using actsim::activity::Activity;
using actsim::activity::ActivityModel;
using actsim::activity::ActivityNode;
using actsim::activity::Behavior;
using actsim::activity::NodeKind;
using actsim::activity::ParamValue;

class Random {
 public:
  explicit Random(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return below(2) == 1; }
  std::mt19937_64& engine() { return rng_; }

  std::string identifier(const std::string& prefix) {
    static const char* kAlpha = "abcdefghijklmnopqrstuvwxyz_0123456789";
    std::string out = prefix;
    std::size_t n = below(4);
    for (std::size_t i = 0; i < n; ++i) out += kAlpha[below(37)];
    return out;
  }

  ParamValue number(bool allow_fraction = true) {
    std::string text = std::to_string(below(50));
    if (allow_fraction && coin()) text += "." + std::to_string(1 + below(9));
    return ParamValue::number(text);
  }

  ParamValue text() {
    static const std::vector<std::string> pieces = {"a", "b", "x y", "q\"t", "back\\slash", "é"};
    std::string out;
    std::size_t n = 1 + below(3);
    for (std::size_t i = 0; i < n; ++i) out += (i ? "," : "") + pieces[below(pieces.size())];
    return ParamValue::string(out);
  }

 private:
  std::mt19937_64 rng_;
};

inline void add_params(Random& r, ActivityNode& node, const std::vector<std::string>& successors) {
  auto maybe = [&](const std::string& key, ParamValue v) {
    if (r.coin()) node.params[key] = std::move(v);
  };
  auto confluent = [&] {
    return ParamValue::identifier(r.coin() ? "ext_then_int" : "int_then_ext");
  };
  switch (node.kind) {
    case NodeKind::action:
      maybe("duration", r.number());
      maybe("capacity", r.number(false));
      maybe("overflow", ParamValue::identifier(r.coin() ? "drop" : "stuck"));
      maybe("confluent", confluent());
      break;
    case NodeKind::generator:
      node.params["period"] = ParamValue::number(std::to_string(1 + r.below(9)));
      maybe("count", r.number(false));
      maybe("tags", r.text());
      break;
    case NodeKind::transducer:
      maybe("window", ParamValue::number(std::to_string(1 + r.below(99))));
      break;
    case NodeKind::fork:
    case NodeKind::merge:
      maybe("delay", r.number());
      maybe("confluent", confluent());
      break;
    case NodeKind::join:
      maybe("delay", r.number());
      maybe("capacity", r.number(false));
      maybe("overflow", ParamValue::identifier(r.coin() ? "drop" : "stuck"));
      break;
    case NodeKind::decision: {
      std::size_t policy = r.below(3);
      if (policy == 0) node.params["policy"] = ParamValue::identifier("round_robin");
      if (policy == 1) {
        node.params["policy"] = ParamValue::identifier("random");
        maybe("seed", r.number(false));
      }
      if (policy == 2) {
        node.params["policy"] = ParamValue::identifier("guard");
        node.params["guards"] = ParamValue::string("a:" + successors.front());
        node.params["default"] = ParamValue::identifier(successors.back());
      }
      maybe("delay", r.number());
      break;
    }
    default:
      break;
  }
}

/// A valid activity: initial -> [generator] -> body -> final, where the body
/// is a sequence of single nodes and fork/join or decision/merge diamonds.
/// `callees` lists activities this one may call. Only the root may start
/// with a generator, since a called activity's entry receives jobs.
inline Activity random_activity(Random& r, const std::string& name,
                                const std::vector<std::string>& callees, bool root = true) {
  Activity a;
  a.name = name;
  std::size_t next_id = 0;
  auto fresh = [&](const std::string& stem) {
    return r.identifier(stem) + "_" + std::to_string(next_id++);
  };
  auto add = [&](NodeKind kind, const std::string& label) -> ActivityNode& {
    ActivityNode n;
    n.kind = kind;
    n.label = label;
    a.nodes.push_back(std::move(n));
    return a.nodes.back();
  };
  auto edge = [&](const std::string& s, const std::string& t) { a.edges.push_back({s, t, {}}); };

  std::string tail = fresh("start");
  add(NodeKind::initial, tail);
  if (root && r.coin()) {
    std::string g = fresh("gen");
    add_params(r, add(NodeKind::generator, g), {});
    edge(tail, g);
    tail = g;
  }
  std::size_t segments = 1 + r.below(4);
  for (std::size_t s = 0; s < segments; ++s) {
    std::size_t shape = r.below(callees.empty() ? 3 : 4);
    if (shape == 0) {
      std::string act = fresh("act");
      add_params(r, add(NodeKind::action, act), {});
      edge(tail, act);
      tail = act;
    } else if (shape == 3) {
      std::string c = fresh("call");
      auto& node = add(NodeKind::call, c);
      node.call_target = callees[r.below(callees.size())];
      edge(tail, c);
      tail = c;
    } else {
      bool sync = shape == 1;
      std::string split = fresh(sync ? "fork" : "dec");
      std::string gather = fresh(sync ? "join" : "merge");
      std::vector<std::string> branches;
      std::size_t width = 2 + r.below(2);
      for (std::size_t b = 0; b < width; ++b) branches.push_back(fresh("br"));
      add_params(r, add(sync ? NodeKind::fork : NodeKind::decision, split), branches);
      for (const auto& b : branches) add_params(r, add(NodeKind::action, b), {});
      add_params(r, add(sync ? NodeKind::join : NodeKind::merge, gather), {});
      edge(tail, split);
      for (const auto& b : branches) {
        edge(split, b);
        edge(b, gather);
      }
      tail = gather;
    }
  }
  if (r.coin()) {
    std::string t = fresh("meter");
    add_params(r, add(NodeKind::transducer, t), {});
    edge(tail, t);
  } else {
    std::string f = fresh("end");
    add(NodeKind::final, f);
    edge(tail, f);
  }
  // Shuffle declaration order; validity does not depend on it.
  std::shuffle(a.nodes.begin(), a.nodes.end(), r.engine());
  std::shuffle(a.edges.begin(), a.edges.end(), r.engine());
  return a;
}

/// A model whose call graph is acyclic: activity i only calls j > i.
inline ActivityModel random_model(Random& r) {
  ActivityModel m;
  std::size_t behaviors = 1 + r.below(3);
  std::vector<std::string> names;
  std::vector<std::size_t> owner;
  for (std::size_t b = 0; b < behaviors; ++b) {
    std::size_t acts = 1 + r.below(2);
    for (std::size_t k = 0; k < acts; ++k) {
      names.push_back("A" + std::to_string(names.size()) + r.identifier("x"));
      owner.push_back(b);
    }
  }
  for (std::size_t b = 0; b < behaviors; ++b) {
    m.behaviors.push_back({"B" + std::to_string(b) + r.identifier("y"), {}, {}});
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<std::string> callees(names.begin() + static_cast<std::ptrdiff_t>(i) + 1, names.end());
    m.behaviors[owner[i]].activities.push_back(random_activity(r, names[i], callees, i == 0));
  }
  m.root = m.behaviors.front().name;
  return m;
}

}  // namespace gen
