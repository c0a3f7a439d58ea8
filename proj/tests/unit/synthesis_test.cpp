#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "actsim/config_search.hpp"
#include "actsim/dsl.hpp"
#include "actsim/simulator.hpp"
#include "actsim/synthesis.hpp"
#include "support/generators.hpp"

using namespace actsim;
using activity::NodeKind;

namespace {

activity::ActivityModel load(const std::string& name) {
  std::ifstream in(std::string(ACTSIM_MODELS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  auto result = dsl::parse(ss.str());
  if (!result.ok()) throw std::runtime_error(result.errors.front().message());
  return *result.model;
}

std::set<std::string> names(const devs::CoupledSpec& spec) {
  std::set<std::string> out;
  for (const auto& c : spec.components) out.insert(c.name);
  return out;
}

std::set<std::pair<std::string, std::string>> links(const devs::CoupledSpec& spec) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& k : spec.couplings) out.insert({k.from.component, k.to.component});
  return out;
}

const devs::ActionModel& action_of(const devs::CoupledSpec& spec, const std::string& name) {
  return dynamic_cast<const devs::ActionModel&>(*spec.find(name)->model);
}

}  // namespace

TEST(Synthesis, DivideConquerIsFiveComponentsPlusSink) {
  auto spec = synthesize(search::divide_conquer_activity(5, 1, 4, 2));
  EXPECT_EQ(names(spec), (std::set<std::string>{"gen", "fork", "a1", "a2", "join", "end"}));
  std::map<std::string, std::string> types;
  for (const auto& c : spec.components) types[c.name] = std::string(c.model->type_name());
  EXPECT_EQ(types, (std::map<std::string, std::string>{{"gen", "generator"},
                                                       {"fork", "fork"},
                                                       {"a1", "action"},
                                                       {"a2", "action"},
                                                       {"join", "join"},
                                                       {"end", "sink"}}));
  EXPECT_EQ(links(spec), (std::set<std::pair<std::string, std::string>>{{"gen", "fork"},
                                                                        {"fork", "a1"},
                                                                        {"fork", "a2"},
                                                                        {"a1", "join"},
                                                                        {"a2", "join"},
                                                                        {"join", "end"}}));
  EXPECT_EQ(spec.couplings.size(), 6u);
}

TEST(Synthesis, InitialToFinalIsEmpty) {
  activity::Activity a;
  a.name = "A";
  a.nodes = {{"i", NodeKind::initial, {}, {}, {}}, {"f", NodeKind::final, {}, {}, {}}};
  a.edges = {{"i", "f", {}}};
  auto spec = synthesize(a);
  // The final node still becomes a sink; no edge survives.
  EXPECT_TRUE(spec.couplings.empty());
  for (const auto& c : spec.components) EXPECT_EQ(c.model->type_name(), "sink");
}

TEST(Synthesis, MultiServerCounts) {
  auto spec = synthesize_model(load("multi_server.act"));
  EXPECT_EQ(names(spec), (std::set<std::string>{"gen", "dispatch", "s1.work", "s2.work", "s3.work",
                                                "collect", "meter"}));
  EXPECT_EQ(spec.couplings.size(), 8u);
}

TEST(Synthesis, PortsFollowNodeKinds) {
  auto spec = synthesize(search::divide_conquer_activity(5, 1, 4, 2));
  EXPECT_EQ(spec.find("fork")->model->output_ports(), (std::vector<std::string>{"out_a1", "out_a2"}));
  EXPECT_EQ(spec.find("join")->model->input_ports(), (std::vector<std::string>{"in_a1", "in_a2"}));
}

TEST(Synthesis, OverridesApplyAtConfiguredSite) {
  auto act = search::divide_conquer_activity(5, 1, 4, 2);
  SemanticsConfig config;
  config.capacity = 3;
  config.overflow = devs::Overflow::stuck;
  auto on_actions = synthesize(act, config);
  EXPECT_EQ(action_of(on_actions, "a2").params().capacity, 3u);
  EXPECT_EQ(action_of(on_actions, "a2").params().overflow, devs::Overflow::stuck);
  const auto& join = dynamic_cast<const devs::SyncModel&>(*on_actions.find("join")->model);
  EXPECT_FALSE(join.params().capacity.has_value());

  config.site = OverflowSite::join;
  auto on_join = synthesize(act, config);
  EXPECT_FALSE(action_of(on_join, "a2").params().capacity.has_value());
  const auto& join2 = dynamic_cast<const devs::SyncModel&>(*on_join.find("join")->model);
  EXPECT_EQ(join2.params().capacity, 3u);
  EXPECT_EQ(join2.params().overflow, devs::Overflow::stuck);
}

TEST(Synthesis, TickScaleConvertsDecimals) {
  auto model = dsl::parse(
      "behavior B { activity A { node i: initial node g: generator(period=2.5, count=1) "
      "node a: action(duration=0.5) node f: final edge i->g edge g->a edge a->f } }");
  ASSERT_TRUE(model.ok());
  SemanticsConfig config;
  config.tick_scale = 10;
  auto spec = synthesize_model(*model.model, config);
  EXPECT_EQ(action_of(spec, "a").params().duration, Time(5));
  devs::Simulator sim(spec);
  EXPECT_EQ(sim.next_event_time(), Time(25));
  config.tick_scale = 1;
  EXPECT_THROW(synthesize_model(*model.model, config), std::invalid_argument);
}

TEST(Synthesis, InvalidModelIsRejected) {
  auto model = dsl::parse("behavior B { activity A { node i: initial edge i->ghost } }");
  ASSERT_TRUE(model.ok());
  EXPECT_THROW(synthesize_model(*model.model), std::invalid_argument);
}

TEST(Synthesis, ExportFollowsSchema) {
  auto spec = synthesize(search::divide_conquer_activity(5, 1, 4, 2));
  auto doc = nlohmann::json::parse(export_json(spec));
  EXPECT_EQ(doc["schema"], "actsim-coupled-v1");
  EXPECT_EQ(doc["tick_scale"], 1);
  ASSERT_EQ(doc["components"].size(), 6u);
  ASSERT_EQ(doc["couplings"].size(), 6u);
  for (const auto& c : doc["components"]) {
    for (const char* key : {"name", "type", "inputs", "outputs", "phases", "params"}) {
      EXPECT_TRUE(c.contains(key)) << key;
    }
  }
  auto a2 = std::find_if(doc["components"].begin(), doc["components"].end(),
                         [](const auto& c) { return c["name"] == "a2"; });
  ASSERT_NE(a2, doc["components"].end());
  EXPECT_EQ((*a2)["params"]["duration"], "4");
  EXPECT_EQ((*a2)["phases"], nlohmann::json({"idle", "busy", "stuck"}));
  EXPECT_EQ(doc["couplings"][0]["from"]["component"], "gen");
}

TEST(SynthesisProperty, ComponentsBijectWithNodesAndCouplingsWithEdges) {
  gen::Random r(8);
  SemanticsConfig config;
  config.tick_scale = 10;
  std::size_t checked = 0;
  for (int i = 0; i < 300; ++i) {
    auto model = gen::random_model(r);
    auto flat = activity::flatten_hierarchy(model);
    devs::CoupledSpec spec;
    try {
      spec = synthesize(flat, config);
    } catch (const std::invalid_argument&) {
      continue;  // e.g. a generated guard naming a port the node lacks
    }
    ++checked;
    std::set<std::string> expected_names;
    for (const auto& n : flat.nodes) {
      if (n.kind != NodeKind::initial) expected_names.insert(n.label);
    }
    EXPECT_EQ(names(spec), expected_names);
    EXPECT_EQ(spec.components.size(), expected_names.size());
    std::set<std::pair<std::string, std::string>> expected_links;
    std::size_t kept = 0;
    for (const auto& e : flat.edges) {
      if (flat.find_node(e.source)->kind == NodeKind::initial) continue;
      expected_links.insert({e.source, e.target});
      ++kept;
    }
    EXPECT_EQ(links(spec), expected_links);
    EXPECT_EQ(spec.couplings.size(), kept);
  }
  EXPECT_GT(checked, 250u);
}
