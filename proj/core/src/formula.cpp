#include "actsim/formula.hpp"

#include <algorithm>
#include <cctype>

namespace actsim::check {

Expr Expr::deadlock() { return Expr{}; }

Expr Expr::clock_gt(Time c) {
  Expr e;
  e.kind = Kind::clock_gt;
  e.constant = c;
  return e;
}

Expr Expr::phase_eq(std::string component, std::string phase) {
  Expr e;
  e.kind = Kind::phase_eq;
  e.component = std::move(component);
  e.phase = std::move(phase);
  return e;
}

Expr Expr::negate(Expr inner) {
  Expr e;
  e.kind = Kind::negation;
  e.args.push_back(std::move(inner));
  return e;
}

Expr Expr::implies(Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::implies;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

FormulaError::FormulaError(std::size_t line, std::size_t column, const std::string& message)
    : std::invalid_argument(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

class Parser {
 public:
  Parser(std::string_view text, TickScale scale, std::size_t line)
      : text_(text), scale_(scale), line_(line) {}

  Expr parse_ag() {
    expect_word("AG");
    expect("(");
    Expr body = parse_implies();
    expect(")");
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing text '" + std::string(text_.substr(pos_)) + "'");
    return body;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw FormulaError(line_, pos_ + 1, message);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
  }

  bool peek(std::string_view token) {
    skip_space();
    return text_.substr(pos_, token.size()) == token;
  }

  bool accept(std::string_view token) {
    if (!peek(token)) return false;
    pos_ += token.size();
    return true;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  std::string word() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect_word(std::string_view w) {
    std::size_t at = pos_;
    if (word() != w) {
      pos_ = at;
      skip_space();
      fail("expected '" + std::string(w) + "'");
    }
  }

  Expr parse_implies() {
    Expr lhs = parse_unary();
    if (accept("->") || accept("=>")) return Expr::implies(std::move(lhs), parse_implies());
    return lhs;
  }

  Expr parse_unary() {
    skip_space();
    if (accept("(")) {
      Expr inner = parse_implies();
      expect(")");
      return inner;
    }
    std::size_t at = pos_;
    std::string w = word();
    if (w.empty()) fail("expected 'not', 'deadlock', 'clock' or a phase atom");
    if (w == "not") return Expr::negate(parse_unary());
    if (w == "deadlock") return Expr::deadlock();
    if (w == "clock") {
      expect(">");
      skip_space();
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '.')) {
        ++pos_;
      }
      auto number = text_.substr(start, pos_ - start);
      if (number.empty()) fail("expected a number after 'clock >'");
      auto t = decimal_to_ticks(number, scale_);
      if (!t) {
        pos_ = start;
        fail("clock constant " + std::string(number) + " is not a whole number of ticks");
      }
      return Expr::clock_gt(Time(*t));
    }
    // Phase atom: component name may contain dots (flattened calls).
    std::string path = w;
    while (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::string part = word();
      if (part.empty()) fail("expected an identifier after '.'");
      path += "." + part;
    }
    const std::string suffix = ".phase";
    if (path.size() <= suffix.size() || !path.ends_with(suffix)) {
      pos_ = at;
      skip_space();
      fail("expected 'component.phase == value'");
    }
    expect("==");
    std::string phase = word();
    if (phase.empty()) fail("expected a phase name");
    return Expr::phase_eq(path.substr(0, path.size() - suffix.size()), std::move(phase));
  }

  std::string_view text_;
  TickScale scale_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
  return s;
}

Property parse_line(std::string_view text, TickScale scale, std::size_t line, std::string name) {
  std::size_t colon = text.find(':');
  if (colon != std::string_view::npos) {
    auto head = trim(text.substr(0, colon));
    if (!head.empty() && std::all_of(head.begin(), head.end(), ident_char)) {
      name = std::string(head);
      text = text.substr(colon + 1);
    }
  }
  return {std::move(name), Parser(text, scale, line).parse_ag()};
}

void collect_constants(const Expr& e, std::vector<Time>& out) {
  if (e.kind == Expr::Kind::clock_gt) out.push_back(e.constant);
  for (const auto& a : e.args) collect_constants(a, out);
}

}  // namespace

Property parse_formula(std::string_view text, TickScale scale, std::string name) {
  return parse_line(text, scale, 1, name.empty() ? "property1" : std::move(name));
}

std::vector<Property> parse_property_file(std::string_view text, TickScale scale) {
  std::vector<Property> out;
  std::size_t line = 0;
  while (!text.empty()) {
    ++line;
    std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    std::string_view content = trim(raw);
    if (content.empty() || content.starts_with("//") || content.starts_with('#')) continue;
    out.push_back(parse_line(content, scale, line, "property" + std::to_string(out.size() + 1)));
  }
  return out;
}

std::string to_string(const Expr& e, TickScale scale) {
  switch (e.kind) {
    case Expr::Kind::deadlock: return "deadlock";
    case Expr::Kind::clock_gt: return "clock > " + format_time(e.constant, scale);
    case Expr::Kind::phase_eq: return e.component + ".phase == " + e.phase;
    case Expr::Kind::negation: {
      const Expr& a = e.args[0];
      bool wrap = a.kind == Expr::Kind::implies;
      return "not " + (wrap ? "(" + to_string(a, scale) + ")" : to_string(a, scale));
    }
    case Expr::Kind::implies: {
      const Expr& l = e.args[0];
      bool wrap = l.kind == Expr::Kind::implies;
      return (wrap ? "(" + to_string(l, scale) + ")" : to_string(l, scale)) + " -> " +
             to_string(e.args[1], scale);
    }
  }
  return {};
}

std::string to_string(const Property& p, TickScale scale) {
  return "AG (" + to_string(p.body, scale) + ")";
}

std::vector<Time> clock_constants(const Expr& e) {
  std::vector<Time> out;
  collect_constants(e, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace actsim::check
