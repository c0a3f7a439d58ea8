#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "actsim/time.hpp"

namespace actsim::check {

/// Boolean state expression under an implicit AG.
struct Expr {
  enum class Kind { deadlock, clock_gt, phase_eq, negation, implies };

  Kind kind = Kind::deadlock;
  Time constant;          // clock_gt
  std::string component;  // phase_eq
  std::string phase;      // phase_eq
  std::vector<Expr> args;

  static Expr deadlock();
  static Expr clock_gt(Time c);
  static Expr phase_eq(std::string component, std::string phase);
  static Expr negate(Expr e);
  static Expr implies(Expr lhs, Expr rhs);

  bool operator==(const Expr&) const = default;
};

/// A named formula `AG (body)`.
struct Property {
  std::string name;
  Expr body;
};

class FormulaError : public std::invalid_argument {
 public:
  FormulaError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses `AG (expr)`; clock constants are converted at `scale`.
Property parse_formula(std::string_view text, TickScale scale = 1, std::string name = {});

/// One formula per line, optionally prefixed `name:`. Blank lines and
/// lines starting with `//` or `#` are skipped. Unnamed formulae are called
/// `property<N>` by line order.
std::vector<Property> parse_property_file(std::string_view text, TickScale scale = 1);

std::string to_string(const Expr& e, TickScale scale = 1);
std::string to_string(const Property& p, TickScale scale = 1);

/// Clock constants referenced anywhere in `e`.
std::vector<Time> clock_constants(const Expr& e);

}  // namespace actsim::check
