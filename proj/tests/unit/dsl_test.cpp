#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "actsim/dsl.hpp"
#include "support/generators.hpp"

using namespace actsim;
using activity::NodeKind;

namespace {

const char* kMinimal =
    "behavior Main { activity A { node i: initial node a: action(duration=1) node f: final "
    "edge i->a edge a->f } }";

std::string read_model(const std::string& name) {
  std::ifstream in(std::string(ACTSIM_MODELS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Byte offset of a 1-based line/column (columns count code points).
std::size_t offset_of(const std::string& text, SourceSpan span) {
  std::size_t pos = 0;
  for (std::uint32_t line = 1; line < span.line; ++line) pos = text.find('\n', pos) + 1;
  for (std::uint32_t col = 1; col < span.column; ++col) {
    ++pos;
    while (pos < text.size() && (static_cast<unsigned char>(text[pos]) & 0xC0) == 0x80) ++pos;
  }
  return pos;
}

std::optional<std::string> token_for(const std::string& expected) {
  if (expected == "identifier") return "x";
  if (expected == "number") return "1";
  if (expected == "string") return "\"s\"";
  if (expected.size() > 2 && expected.front() == '\'') return expected.substr(1, expected.size() - 2);
  return std::nullopt;
}

}  // namespace

TEST(Dsl, MinimalProgramParses) {
  auto result = dsl::parse(kMinimal);
  ASSERT_TRUE(result.ok());
  const auto& m = *result.model;
  ASSERT_EQ(m.behaviors.size(), 1u);
  EXPECT_EQ(m.root, "Main");
  const auto& a = m.behaviors[0].activities.at(0);
  EXPECT_EQ(a.nodes.size(), 3u);
  EXPECT_EQ(a.edges.size(), 2u);
  EXPECT_EQ(a.find_node("a")->params.at("duration"), activity::ParamValue::number("1"));
}

TEST(Dsl, MissingEdgeTargetExpectsIdentifier) {
  std::string src = "behavior Main {\n  activity A {\n    node i: initial\n    edge i ->\n  }\n}\n";
  auto result = dsl::parse(src);
  ASSERT_FALSE(result.ok());
  ASSERT_EQ(result.errors.size(), 1u);
  const auto& e = result.errors[0];
  EXPECT_EQ(e.expected, std::vector<std::string>{"identifier"});
  EXPECT_EQ(e.span.line, 5u);
  EXPECT_EQ(e.span.column, 3u);
  EXPECT_EQ(e.found, "}");
}

TEST(Dsl, ReportsIndependentErrors) {
  std::string src =
      "behavior Main {\n activity A {\n  node : initial\n  node a action\n  edge a -> b\n }\n}\n"
      "behavior Main { activity B { node x: final } }\n";
  auto result = dsl::parse(src);
  ASSERT_FALSE(result.ok());
  ASSERT_EQ(result.errors.size(), 3u);
  EXPECT_EQ(result.errors[0].span.line, 3u);
  EXPECT_EQ(result.errors[1].span.line, 4u);
  EXPECT_EQ(result.errors[2].expected, std::vector<std::string>{"unique behavior name"});
}

TEST(Dsl, BundledDivideConquerIsSevenNodes) {
  auto result = dsl::parse(read_model("divide_conquer.act"));
  ASSERT_TRUE(result.ok()) << result.errors.front().message();
  auto flat = activity::flatten_hierarchy(*result.model);
  EXPECT_EQ(flat.nodes.size(), 7u);
  EXPECT_EQ(flat.edges.size(), 7u);
  std::vector<std::pair<std::string, NodeKind>> expected = {
      {"start", NodeKind::initial}, {"gen", NodeKind::generator}, {"fork", NodeKind::fork},
      {"a1", NodeKind::action},     {"a2", NodeKind::action},     {"join", NodeKind::join},
      {"end", NodeKind::final}};
  for (const auto& [label, kind] : expected) {
    ASSERT_NE(flat.find_node(label), nullptr) << label;
    EXPECT_EQ(flat.find_node(label)->kind, kind) << label;
  }
  EXPECT_TRUE(activity::validate_model(*result.model).empty());
}

TEST(Dsl, BundledModelsParseAndValidate) {
  for (const char* name : {"divide_conquer.act", "divide_conquer_t2_4.act", "divide_conquer_t2_5.act",
                           "divide_conquer_t2_6.act", "multi_server.act"}) {
    auto result = dsl::parse(read_model(name));
    ASSERT_TRUE(result.ok()) << name;
    EXPECT_FALSE(activity::has_errors(activity::validate_model(*result.model))) << name;
  }
}

TEST(Dsl, SerializeIsCanonicalFixedPoint) {
  auto first = dsl::serialize(*dsl::parse(kMinimal).model);
  EXPECT_EQ(first,
            "behavior Main {\n"
            "  activity A {\n"
            "    node i: initial\n"
            "    node a: action(duration=1)\n"
            "    node f: final\n"
            "    edge i -> a\n"
            "    edge a -> f\n"
            "  }\n"
            "}\n");
  EXPECT_EQ(dsl::serialize(*dsl::parse(first).model), first);
}

TEST(Dsl, ParamsAreEmittedInKeyOrder) {
  activity::ActivityNode n;
  n.label = "a";
  n.kind = NodeKind::action;
  n.params.emplace("overflow", activity::ParamValue::identifier("drop"));
  n.params.emplace("duration", activity::ParamValue::number("2"));
  n.params.emplace("capacity", activity::ParamValue::number("1"));
  activity::Activity act;
  act.name = "A";
  act.nodes.push_back(n);
  auto text = dsl::serialize(activity::single_activity_model(act));
  EXPECT_NE(text.find("node a: action(capacity=1, duration=2, overflow=drop)"), std::string::npos);
}

TEST(Dsl, StringsRoundTripWithEscapes) {
  activity::ActivityNode n;
  n.label = "g";
  n.kind = NodeKind::generator;
  n.params.emplace("tags", activity::ParamValue::string("q\"t,back\\slash,\xC3\xA9"));
  activity::Activity act;
  act.name = "A";
  act.nodes.push_back(n);
  auto model = activity::single_activity_model(act);
  auto reparsed = dsl::parse(dsl::serialize(model));
  ASSERT_TRUE(reparsed.ok());
  EXPECT_EQ(*reparsed.model, model);
}

TEST(Dsl, IdentifierRule) {
  EXPECT_TRUE(dsl::is_identifier("a_1"));
  EXPECT_TRUE(dsl::is_identifier("_x"));
  EXPECT_FALSE(dsl::is_identifier("1a"));
  EXPECT_FALSE(dsl::is_identifier(""));
  EXPECT_FALSE(dsl::is_identifier("a-b"));
}

TEST(DslProperty, RoundTripThousandGeneratedModels) {
  gen::Random r(2024);
  for (int i = 0; i < 1000; ++i) {
    auto model = gen::random_model(r);
    ASSERT_FALSE(activity::has_errors(activity::validate_model(model)));
    auto text = dsl::serialize(model);
    auto parsed = dsl::parse(text);
    ASSERT_TRUE(parsed.ok()) << text << "\n" << parsed.errors.front().message();
    ASSERT_EQ(*parsed.model, model) << text;
    EXPECT_EQ(dsl::serialize(*parsed.model), text);
  }
}

TEST(DslProperty, ArbitraryBytesNeverCrash) {
  gen::Random r(77);
  std::vector<std::string> corpus = {kMinimal, read_model("divide_conquer.act"),
                                     read_model("multi_server.act")};
  for (int i = 0; i < 3000; ++i) {
    std::string text = corpus[r.below(corpus.size())];
    std::size_t edits = 1 + r.below(8);
    for (std::size_t k = 0; k < edits && !text.empty(); ++k) {
      std::size_t pos = r.below(text.size());
      switch (r.below(4)) {
        case 0: text.erase(pos, 1 + r.below(5)); break;
        case 1: text.insert(pos, 1, static_cast<char>(r.below(256))); break;
        case 2: text[pos] = static_cast<char>(r.below(256)); break;
        default: text.resize(pos); break;
      }
    }
    auto result = dsl::parse(text);
    if (!result.ok()) {
      for (const auto& e : result.errors) {
        EXPECT_FALSE(e.expected.empty());
        EXPECT_GE(e.span.line, 1u);
        EXPECT_GE(e.span.column, 1u);
      }
    }
  }
}

TEST(DslProperty, ErrorSpansPointAtReplaceableText) {
  gen::Random r(31);
  static const std::string kPieces[] = {"", "->", "(", ")", "=", ":", "{", "}", ",", "7", "\"q\"", "edge"};
  std::size_t checked = 0;
  for (int i = 0; i < 1500; ++i) {
    std::string text = dsl::serialize(gen::random_model(r));
    // Replace one token-sized stretch with a grammar piece.
    std::size_t pos = r.below(text.size());
    std::size_t len = r.below(6);
    text.replace(pos, std::min(len, text.size() - pos), kPieces[r.below(std::size(kPieces))]);
    auto result = dsl::parse(text);
    for (const auto& e : result.errors) {
      auto token = token_for(e.expected.front());
      if (!token) continue;  // semantic duplicates
      std::size_t at = offset_of(text, e.span);
      std::size_t bytes = offset_of(text, {e.span.line, e.span.column + e.span.length, 0}) - at;
      std::string fixed = text;
      fixed.replace(at, bytes, " " + *token + " ");
      auto again = dsl::parse(fixed);
      for (const auto& e2 : again.errors) {
        bool same = e2.span.line == e.span.line && e2.span.column == e.span.column + 1 &&
                    e2.expected == e.expected;
        EXPECT_FALSE(same) << text << "\n-- fixed --\n" << fixed << "\n" << e.message();
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 500u);
}
