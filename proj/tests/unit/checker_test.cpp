#include <gtest/gtest.h>

#include <chrono>

#include "actsim/checker.hpp"
#include "actsim/config_search.hpp"
#include "actsim/simulator.hpp"
#include "actsim/templates.hpp"

using namespace actsim;
using namespace actsim::check;

namespace {

SemanticsConfig config_of(std::uint64_t capacity, devs::Overflow overflow,
                          devs::ConfluentOrder order = devs::ConfluentOrder::ext_then_int) {
  SemanticsConfig c;
  c.capacity = capacity;
  c.overflow = overflow;
  c.confluent = order;
  return c;
}

// Deadlock row: two jobs, a2 without a waiting room that drops.
devs::CoupledSpec deadlock_row(std::uint64_t t2) {
  return synthesize(search::divide_conquer_activity(5, 1, t2, 2), config_of(0, devs::Overflow::drop));
}

// Busy row: eight jobs, one waiting slot, stuck on overflow.
devs::CoupledSpec busy_row(std::uint64_t t2) {
  return synthesize(search::divide_conquer_activity(5, 1, t2, 8), config_of(1, devs::Overflow::stuck));
}

std::string phase_in(const WitnessStep& step, const std::string& component) {
  for (const auto& cp : step.phases) {
    if (cp.component == component) return cp.phase;
  }
  return {};
}

}  // namespace

TEST(Constraints, DerivedFromDeclaredDomains) {
  auto spec = busy_row(6);
  auto c = derive_constraints(spec, Time(60));
  EXPECT_EQ(c.horizon, Time(60));
  ASSERT_EQ(c.components.size(), spec.components.size());
  for (const auto& cc : c.components) {
    for (const auto& d : cc.domains) EXPECT_TRUE(d.hi.has_value()) << cc.component << "." << d.name;
  }
  // a2's waiting room holds at most one job; unbounded stores get the job total.
  const auto& a2 = c.components[*spec.index_of("a2")];
  EXPECT_EQ(a2.domains[1].hi, 1);
  const auto& join = c.components[*spec.index_of("join")];
  EXPECT_EQ(join.domains[0].hi, 8);
}

TEST(Constraints, UnboundedGeneratorIsRejected) {
  auto spec = synthesize(search::divide_conquer_activity(5, 1, 4, std::nullopt));
  EXPECT_THROW(derive_constraints(spec), UnconstrainedModel);
}

TEST(ReachGraph, SingleGenerator) {
  devs::CoupledSpec spec{"g", {{"gen", devs::make_generator({Time(5), 1, {}})}}, {}, {}, {}};
  auto graph = build_reach_graph(spec, derive_constraints(spec));
  // The emission happens on the transition out of the armed state.
  ASSERT_EQ(graph.nodes().size(), 2u);
  EXPECT_EQ(graph.nodes()[0].cls, NodeClass::live);
  EXPECT_EQ(graph.nodes()[0].dwell, Time(5));
  EXPECT_EQ(graph.nodes()[1].cls, NodeClass::quiescent_safe);
  EXPECT_EQ(graph.nodes()[1].time, Time(5));
  EXPECT_TRUE(check::check(graph, search::no_deadlock_property()).satisfied);
}

TEST(ReachGraph, EmptyModelHasNoDeadlock) {
  devs::CoupledSpec spec{"empty", {}, {}, {}, {}};
  auto graph = build_reach_graph(spec, derive_constraints(spec));
  EXPECT_EQ(graph.nodes().size(), 1u);
  EXPECT_TRUE(detect_deadlock(graph).empty());
}

TEST(ReachGraph, EveryNonSinkHasSuccessor) {
  for (std::uint64_t t2 : {4, 5, 6, 8}) {
    auto graph = build_reach_graph(busy_row(t2), derive_constraints(busy_row(t2), Time(60)));
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
      const auto& n = graph.nodes()[i];
      bool sink = n.cls != NodeClass::live;
      EXPECT_EQ(sink, graph.out_edges(i).empty()) << i;
      if (sink) EXPECT_TRUE(n.dwell.is_infinite() || n.cls == NodeClass::constraint_violation);
    }
  }
}

TEST(Deadlock, DropRowNoDeadlockWhenA2KeepsUp) {
  auto spec = deadlock_row(4);
  auto graph = build_reach_graph(spec, derive_constraints(spec));
  EXPECT_TRUE(detect_deadlock(graph).empty());
  EXPECT_EQ(graph.count(NodeClass::deadlock), 0u);
  EXPECT_GE(graph.count(NodeClass::quiescent_safe), 1u);
  EXPECT_TRUE(check::check(graph, search::no_deadlock_property()).satisfied);
}

TEST(Deadlock, DropRowDeadlocksAtCoincidence) {
  auto spec = deadlock_row(5);
  auto graph = build_reach_graph(spec, derive_constraints(spec));
  auto reports = detect_deadlock(graph);
  ASSERT_FALSE(reports.empty());
  EXPECT_EQ(reports.size(), graph.count(NodeClass::deadlock));
  // Job 2 is dropped by a2, so the join holds a1's copy forever.
  const auto& dead = graph.nodes()[reports[0].node].state;
  const auto& join_state = dead.states[*spec.index_of("join")];
  EXPECT_EQ(join_state.phase, "waiting");
  ASSERT_EQ(join_state.stores[0].size(), 1u);
  EXPECT_EQ(join_state.stores[0][0].ids, std::vector<std::uint64_t>{2});
}

TEST(Deadlock, StuckActionDeadlocksOnce) {
  auto spec = synthesize(search::divide_conquer_activity(5, 1, 6, 2), config_of(0, devs::Overflow::stuck));
  auto graph = build_reach_graph(spec, derive_constraints(spec));
  std::size_t terminals = 0;
  for (const auto& n : graph.nodes()) {
    if (n.cls != NodeClass::live) ++terminals;
  }
  EXPECT_EQ(terminals, 1u);
  auto reports = detect_deadlock(graph);
  ASSERT_EQ(reports.size(), 1u);
  const auto& last = reports[0].witness.back();
  EXPECT_EQ(phase_in(last, "join"), "waiting");
  EXPECT_EQ(phase_in(last, "a2"), "stuck");
}

TEST(Check, BusyAfterFailsWhenA2Idles) {
  auto spec = busy_row(4);
  auto graph = build_reach_graph(spec, derive_constraints(spec, Time(60)));
  auto verdict = check::check(graph, search::busy_after_property(5));
  ASSERT_FALSE(verdict.satisfied);
  // a2 finishes job 1 at 9 and is idle until job 2 arrives at 10.
  EXPECT_EQ(verdict.at, Time(9));
  ASSERT_FALSE(verdict.witness.empty());
  EXPECT_EQ(phase_in(verdict.witness.back(), "a2"), "idle");
  EXPECT_EQ(verdict.witness.back().time, Time(9));
  EXPECT_EQ(verdict.witness.front().via, "");
}

TEST(Check, BusyAfterHoldsForLongService) {
  for (std::uint64_t t2 : {6, 8}) {
    auto spec = busy_row(t2);
    auto graph = build_reach_graph(spec, derive_constraints(spec, Time(60)));
    EXPECT_TRUE(check::check(graph, search::busy_after_property(5)).satisfied) << t2;
  }
}

TEST(Check, ClockBoundaryIsStrict) {
  // a2 is idle until the first job arrives at exactly 5: `clock > 5` is
  // false at 5, so the property holds up to the first idle gap.
  auto spec = busy_row(6);
  auto graph = build_reach_graph(spec, derive_constraints(spec, Time(60)));
  EXPECT_TRUE(check::check(graph, parse_formula("AG (clock > 5 -> a2.phase == busy)")).satisfied);
  EXPECT_FALSE(check::check(graph, parse_formula("AG (clock > 4 -> a2.phase == busy)")).satisfied);
}

TEST(Check, ClockAtomsNeedAHorizon) {
  auto spec = busy_row(6);
  auto no_horizon = build_reach_graph(spec, derive_constraints(spec));
  EXPECT_THROW(check::check(no_horizon, search::busy_after_property(5)), std::invalid_argument);
  auto short_horizon = build_reach_graph(spec, derive_constraints(spec, Time(5)));
  EXPECT_THROW(check::check(short_horizon, search::busy_after_property(5)), std::invalid_argument);
}

TEST(Check, UnknownComponentOrPhaseIsRejected) {
  auto spec = deadlock_row(4);
  auto graph = build_reach_graph(spec, derive_constraints(spec));
  EXPECT_THROW(validate_property(graph, parse_formula("AG (nope.phase == busy)")), std::invalid_argument);
  EXPECT_THROW(validate_property(graph, parse_formula("AG (a2.phase == sleeping)")), std::invalid_argument);
  EXPECT_NO_THROW(validate_property(graph, parse_formula("AG (a2.phase == busy)")));
}

TEST(Check, VerdictsAreDeterministic) {
  auto run = [] {
    auto spec = busy_row(5);
    auto graph = build_reach_graph(spec, derive_constraints(spec, Time(60)));
    auto v = check::check(graph, search::busy_after_property(5));
    std::string out = std::to_string(v.satisfied) + "@" + format_time(v.at) + ":" + std::to_string(graph.nodes().size());
    for (const auto& s : v.witness) {
      out += "|" + format_time(s.time) + " " + s.via;
      for (const auto& p : s.phases) out += " " + p.component + "=" + p.phase;
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Check, BudgetExceededRaisesResourceError) {
  auto spec = busy_row(6);
  auto c = derive_constraints(spec, Time(60));
  c.node_budget = 10;
  try {
    build_reach_graph(spec, c);
    FAIL() << "expected ResourceError";
  } catch (const ResourceError& e) {
    EXPECT_GE(e.nodes(), 10u);
    EXPECT_GT(e.frontier(), 0u);
  }
}

TEST(Check, ConstraintViolationIsASink) {
  auto spec = busy_row(8);
  auto c = derive_constraints(spec, Time(60));
  // Pretend a2 may not queue at all: the first queued job leaves the domain.
  c.components[*spec.index_of("a2")].domains[1].hi = 0;
  auto graph = build_reach_graph(spec, c);
  EXPECT_GE(graph.count(NodeClass::constraint_violation), 1u);
  for (const auto& n : graph.nodes()) {
    if (n.cls == NodeClass::constraint_violation) EXPECT_FALSE(n.violation.empty());
  }
}

TEST(Check, ExploringConfluentOrdersOnlyAddsBehaviour) {
  for (std::uint64_t t2 : {4, 5, 6}) {
    auto spec = deadlock_row(t2);
    auto fixed = build_reach_graph(spec, derive_constraints(spec));
    auto both = build_reach_graph(spec, derive_constraints(spec, std::nullopt, true));
    EXPECT_GE(both.nodes().size(), fixed.nodes().size());
    // AG monotonicity: a violation under one order survives exploration.
    if (!check::check(fixed, search::no_deadlock_property()).satisfied) {
      EXPECT_FALSE(check::check(both, search::no_deadlock_property()).satisfied);
    }
    for (const auto& n : fixed.nodes()) {
      EXPECT_TRUE(both.lookup(n.state, n.time).has_value());
    }
  }
}

TEST(Soundness, DeadlockWitnessesReplay) {
  for (std::uint64_t t2 : {5, 6, 7, 9}) {
    for (auto overflow : {devs::Overflow::drop, devs::Overflow::stuck}) {
      for (std::uint64_t cap : {0, 1}) {
        auto spec = synthesize(search::divide_conquer_activity(5, 1, t2, 3), config_of(cap, overflow));
        auto graph = build_reach_graph(spec, derive_constraints(spec, std::nullopt, true));
        for (const auto& d : detect_deadlock(graph)) {
          auto replay = replay_witness(graph, d.node, true);
          EXPECT_TRUE(replay.ok) << replay.message;
        }
      }
    }
  }
}

TEST(Soundness, PropertyWitnessesReplay) {
  for (std::uint64_t t2 : {4, 5}) {
    auto spec = busy_row(t2);
    auto graph = build_reach_graph(spec, derive_constraints(spec, Time(60)));
    auto v = check::check(graph, search::busy_after_property(5));
    ASSERT_FALSE(v.satisfied);
    auto replay = replay_witness(graph, *v.node, false);
    EXPECT_TRUE(replay.ok) << replay.message;
  }
}

TEST(Containment, TableScenariosStayInsideTheGraph) {
  for (std::uint64_t t2 : {4, 5, 6}) {
    for (bool busy : {false, true}) {
      auto spec = busy ? busy_row(t2) : deadlock_row(t2);
      auto graph = build_reach_graph(
          spec, derive_constraints(spec, busy ? std::optional<Time>(Time(60)) : std::nullopt));
      auto result = simulation_containment(graph, Time(200));
      EXPECT_TRUE(result.contained) << t2 << " " << busy << ": " << result.message;
      EXPECT_GT(result.steps, 0u);
    }
  }
}

TEST(CrossValidation, CheckerAgreesWithTrace) {
  for (std::uint64_t t2 : {4, 6, 8}) {
    auto spec = busy_row(t2);
    auto report = cross_validate(spec, search::busy_after_property(5), derive_constraints(spec, Time(60)),
                                 Time(200));
    EXPECT_TRUE(report.agree) << t2 << ": " << report.divergence;
    EXPECT_EQ(report.checker_satisfied, t2 != 4);
    EXPECT_EQ(report.trace_satisfied, t2 != 4);
  }
}

TEST(CrossValidation, TraceEvaluationOfDeadlock) {
  auto spec = deadlock_row(5);
  auto v = evaluate_on_trace(spec, search::no_deadlock_property(), Time(200));
  EXPECT_FALSE(v.satisfied);
  EXPECT_TRUE(evaluate_on_trace(deadlock_row(4), search::no_deadlock_property(), Time(200)).satisfied);
}

TEST(CrossValidation, UnseededRandomnessIsRejected) {
  devs::SelectParams p;
  p.in_ports = {"in"};
  p.out_ports = {"out_a", "out_b"};
  p.policy = devs::SelectPolicy::random;
  devs::CoupledSpec spec{"r",
                         {{"gen", devs::make_generator({Time(1), 3, {}})},
                          {"d", devs::make_select(p)},
                          {"a", devs::make_sink()},
                          {"b", devs::make_sink()}},
                         {{{"gen", "out"}, {"d", "in"}}, {{"d", "out_a"}, {"a", "in"}}, {{"d", "out_b"}, {"b", "in"}}},
                         {},
                         {}};
  auto c = derive_constraints(spec);
  EXPECT_THROW(cross_validate(spec, search::no_deadlock_property(), c, Time(10)), std::invalid_argument);
  EXPECT_TRUE(cross_validate(spec, search::no_deadlock_property(), c, Time(10), 7).agree);
  // The checker enumerates both branches for every job.
  auto graph = build_reach_graph(spec, c);
  std::size_t branching = 0;
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) branching += graph.out_edges(i).size() > 1;
  EXPECT_GT(branching, 0u);
}

TEST(Performance, TableRowsAreFast) {
  auto start = std::chrono::steady_clock::now();
  for (std::uint64_t t2 : {4, 5, 6}) {
    auto g1 = build_reach_graph(deadlock_row(t2), derive_constraints(deadlock_row(t2)));
    EXPECT_LT(g1.nodes().size(), 200u);
    check::check(g1, search::no_deadlock_property());
    auto g2 = build_reach_graph(busy_row(t2), derive_constraints(busy_row(t2), Time(60)));
    check::check(g2, search::busy_after_property(5));
  }
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count(), 1000);
}
