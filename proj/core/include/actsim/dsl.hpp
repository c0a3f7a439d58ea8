#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actsim/activity.hpp"

namespace actsim::dsl {

/// A syntax error: what the grammar expected at `span` and what it found.
struct ParseError {
  SourceSpan span;
  std::vector<std::string> expected;
  std::string found;

  std::string message() const;
};

struct ParseResult {
  std::optional<activity::ActivityModel> model;
  std::vector<ParseError> errors;

  bool ok() const { return model.has_value(); }
};

/// Parses `.act` source. Never throws on malformed input; every independent
/// syntax error is reported. The first behavior becomes the model root.
ParseResult parse(std::string_view text);

/// Canonical rendering: root behavior first, one declaration per line,
/// nodes before edges, parameters in key order.
std::string serialize(const activity::ActivityModel& model);

/// True if `text` is a valid DSL identifier (ASCII alphanumerics and '_',
/// not starting with a digit).
bool is_identifier(std::string_view text);

}  // namespace actsim::dsl
