#include "actsim/dsl.hpp"

#include <cctype>
#include <set>

namespace actsim::dsl {

using activity::ActivityEdge;
using activity::ActivityModel;
using activity::ActivityNode;
using activity::NodeKind;
using activity::ParamValue;

namespace {

enum class Tok {
  identifier,
  number,
  string,
  lbrace,
  rbrace,
  lparen,
  rparen,
  colon,
  comma,
  equals,
  arrow,
  invalid,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;  // raw text; for strings, the unescaped value
  SourceSpan span;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::end) break;
    }
    return out;
  }

 private:
  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    unsigned char c = static_cast<unsigned char>(src_[pos_++]);
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if ((c & 0xC0) != 0x80) {
      ++column_;
    }
  }

  // Count of code points in [begin, pos_) on a single line.
  std::uint32_t width_since(std::size_t begin) const {
    std::uint32_t n = 0;
    for (std::size_t i = begin; i < pos_; ++i) {
      if ((static_cast<unsigned char>(src_[i]) & 0xC0) != 0x80) ++n;
    }
    return n;
  }

  Token make(Tok kind, std::size_t begin, std::uint32_t line, std::uint32_t col) {
    Token t;
    t.kind = kind;
    t.text = std::string(src_.substr(begin, pos_ - begin));
    t.span = {line, col, width_since(begin)};
    return t;
  }

  Token next() {
    std::size_t begin = pos_;
    std::uint32_t line = line_;
    std::uint32_t col = column_;
    if (pos_ >= src_.size()) return {Tok::end, "end of input", {line, col, 0}};

    unsigned char c = static_cast<unsigned char>(src_[pos_]);
    auto single = [&](Tok kind) {
      advance();
      return make(kind, begin, line, col);
    };
    switch (c) {
      case '{': return single(Tok::lbrace);
      case '}': return single(Tok::rbrace);
      case '(': return single(Tok::lparen);
      case ')': return single(Tok::rparen);
      case ':': return single(Tok::colon);
      case ',': return single(Tok::comma);
      case '=': return single(Tok::equals);
      default: break;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      advance();
      advance();
      return make(Tok::arrow, begin, line, col);
    }
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) advance();
      return make(Tok::identifier, begin, line, col);
    }
    if (is_digit(c) ||
        (c == '-' && pos_ + 1 < src_.size() && is_digit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      advance();
      while (pos_ < src_.size() && is_digit(static_cast<unsigned char>(src_[pos_]))) advance();
      if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
          is_digit(static_cast<unsigned char>(src_[pos_ + 1]))) {
        advance();
        while (pos_ < src_.size() && is_digit(static_cast<unsigned char>(src_[pos_]))) advance();
      }
      return make(Tok::number, begin, line, col);
    }
    if (c == '"') {
      advance();
      std::string value;
      while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
          advance();
          char e = src_[pos_];
          value += e == 'n' ? '\n' : e;
          advance();
          continue;
        }
        value += src_[pos_];
        advance();
      }
      if (pos_ >= src_.size() || src_[pos_] != '"') {
        Token t = make(Tok::invalid, begin, line, col);
        t.text = "unterminated string";
        return t;
      }
      advance();
      Token t = make(Tok::string, begin, line, col);
      t.text = std::move(value);
      return t;
    }
    // One code point of anything else.
    advance();
    while (pos_ < src_.size() && (static_cast<unsigned char>(src_[pos_]) & 0xC0) == 0x80) {
      advance();
    }
    return make(Tok::invalid, begin, line, col);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t column_ = 1;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::end: return "end of input";
    case Tok::string: return "\"" + t.text + "\"";
    default: return t.text;
  }
}

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = {
      "'initial'", "'final'",    "'action'",   "'fork'",       "'join'",
      "'decision'", "'merge'",   "'generator'", "'transducer'", "'call'"};
  return names;
}

struct SyntaxError {};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ParseResult run() {
    ActivityModel model;
    std::set<std::string> behavior_names;
    if (peek().kind == Tok::end) {
      error({"'behavior'"});
    }
    while (peek().kind != Tok::end) {
      if (!is_keyword("behavior")) {
        error({"'behavior'"});
        skip_until_keyword({"behavior"});
        continue;
      }
      try {
        auto behavior = parse_behavior();
        if (!behavior_names.insert(behavior.name).second) {
          errors_.push_back({behavior.span, {"unique behavior name"}, behavior.name});
        }
        if (model.behaviors.empty()) model.root = behavior.name;
        model.behaviors.push_back(std::move(behavior));
      } catch (const SyntaxError&) {
        skip_until_keyword({"behavior"});
      }
    }
    ParseResult result;
    result.errors = std::move(errors_);
    if (result.errors.empty()) result.model = std::move(model);
    return result;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::end) ++pos_;
    return t;
  }
  bool is_keyword(std::string_view word) const {
    return peek().kind == Tok::identifier && peek().text == word;
  }

  void error(std::vector<std::string> expected) {
    const Token& t = peek();
    errors_.push_back({t.span, std::move(expected), describe(t)});
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    error(std::move(expected));
    throw SyntaxError{};
  }

  const Token& expect(Tok kind, std::string name) {
    if (peek().kind != kind) fail({std::move(name)});
    return take();
  }

  void expect_keyword(std::string_view word) {
    if (!is_keyword(word)) fail({"'" + std::string(word) + "'"});
    take();
  }

  void skip_until_keyword(std::initializer_list<std::string_view> words) {
    while (peek().kind != Tok::end) {
      if (peek().kind == Tok::identifier) {
        for (auto w : words) {
          if (peek().text == w) return;
        }
      }
      take();
    }
  }

  bool at_statement_boundary() const {
    return peek().kind == Tok::rbrace || peek().kind == Tok::end || is_keyword("node") ||
           is_keyword("edge") || is_keyword("activity") || is_keyword("behavior");
  }

  activity::Behavior parse_behavior() {
    activity::Behavior behavior;
    behavior.span = peek().span;
    expect_keyword("behavior");
    const Token& name = expect(Tok::identifier, "identifier");
    behavior.name = name.text;
    behavior.span = name.span;
    expect(Tok::lbrace, "'{'");
    if (!is_keyword("activity")) fail({"'activity'"});
    while (is_keyword("activity")) {
      behavior.activities.push_back(parse_activity());
    }
    if (peek().kind == Tok::rbrace) {
      take();
    } else {
      error({"'activity'", "'}'"});
    }
    return behavior;
  }

  activity::Activity parse_activity() {
    activity::Activity act;
    expect_keyword("activity");
    const Token& name = expect(Tok::identifier, "identifier");
    act.name = name.text;
    act.span = name.span;
    expect(Tok::lbrace, "'{'");
    for (;;) {
      if (peek().kind == Tok::rbrace) {
        take();
        return act;
      }
      if (peek().kind == Tok::end || is_keyword("activity") || is_keyword("behavior")) {
        error({"'node'", "'edge'", "'}'"});
        return act;
      }
      try {
        if (is_keyword("node")) {
          act.nodes.push_back(parse_node());
        } else if (is_keyword("edge")) {
          act.edges.push_back(parse_edge());
        } else {
          fail({"'node'", "'edge'", "'}'"});
        }
      } catch (const SyntaxError&) {
        if (!at_statement_boundary()) take();
        while (!at_statement_boundary()) take();
      }
    }
  }

  ActivityNode parse_node() {
    ActivityNode node;
    expect_keyword("node");
    const Token& label = expect(Tok::identifier, "identifier");
    node.label = label.text;
    node.span = label.span;
    expect(Tok::colon, "':'");
    if (peek().kind != Tok::identifier) fail(kind_names());
    const Token& kind = peek();
    if (kind.text == "call") {
      take();
      node.kind = NodeKind::call;
      expect(Tok::lparen, "'('");
      node.call_target = expect(Tok::identifier, "identifier").text;
      expect(Tok::rparen, "')'");
    } else {
      auto k = activity::node_kind_from_string(kind.text);
      if (!k) fail(kind_names());
      take();
      node.kind = *k;
    }
    if (peek().kind == Tok::lparen) parse_params(node);
    return node;
  }

  void parse_params(ActivityNode& node) {
    expect(Tok::lparen, "'('");
    for (;;) {
      const Token& key = expect(Tok::identifier, "identifier");
      expect(Tok::equals, "'='");
      ParamValue value;
      const Token& v = peek();
      switch (v.kind) {
        case Tok::number: value = ParamValue::number(v.text); break;
        case Tok::identifier: value = ParamValue::identifier(v.text); break;
        case Tok::string: value = ParamValue::string(v.text); break;
        default: fail({"number", "identifier", "string"});
      }
      take();
      if (!node.params.emplace(key.text, std::move(value)).second) {
        errors_.push_back({key.span, {"distinct parameter name"}, key.text});
      }
      if (peek().kind == Tok::comma) {
        take();
        continue;
      }
      expect(Tok::rparen, "')'");
      return;
    }
  }

  ActivityEdge parse_edge() {
    ActivityEdge edge;
    expect_keyword("edge");
    const Token& source = expect(Tok::identifier, "identifier");
    edge.source = source.text;
    edge.span = source.span;
    expect(Tok::arrow, "'->'");
    edge.target = expect(Tok::identifier, "identifier").text;
    return edge;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<ParseError> errors_;
};

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

void write_node(std::string& out, const ActivityNode& node) {
  out += "    node " + node.label + ": ";
  if (node.kind == NodeKind::call) {
    out += "call(" + node.call_target + ")";
  } else {
    out += activity::to_string(node.kind);
  }
  if (!node.params.empty()) {
    out += '(';
    bool first = true;
    for (const auto& [key, value] : node.params) {
      if (!first) out += ", ";
      first = false;
      out += key + "=";
      out += value.kind == ParamValue::Kind::string ? quote(value.text) : value.text;
    }
    out += ')';
  }
  out += '\n';
}

}  // namespace

std::string ParseError::message() const {
  std::string out = std::to_string(span.line) + ":" + std::to_string(span.column) + ": expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += i + 1 == expected.size() ? " or " : ", ";
    out += expected[i];
  }
  return out + ", found " + found;
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !ident_start(static_cast<unsigned char>(text.front()))) return false;
  for (char c : text) {
    if (!ident_char(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

ParseResult parse(std::string_view text) {
  return Parser(Lexer(text).run()).run();
}

std::string serialize(const ActivityModel& model) {
  std::vector<const activity::Behavior*> order;
  if (const auto* root = model.find_behavior(model.root)) order.push_back(root);
  for (const auto& b : model.behaviors) {
    if (order.empty() || &b != order.front()) order.push_back(&b);
  }

  std::string out;
  for (std::size_t bi = 0; bi < order.size(); ++bi) {
    const auto& behavior = *order[bi];
    if (bi) out += '\n';
    out += "behavior " + behavior.name + " {\n";
    for (const auto& act : behavior.activities) {
      out += "  activity " + act.name + " {\n";
      for (const auto& node : act.nodes) write_node(out, node);
      for (const auto& edge : act.edges) {
        out += "    edge " + edge.source + " -> " + edge.target + "\n";
      }
      out += "  }\n";
    }
    out += "}\n";
  }
  return out;
}

}  // namespace actsim::dsl
