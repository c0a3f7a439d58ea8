#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace actsim {

/// Simulation time in integer ticks. `Time::infinity()` is a reserved
/// sentinel that compares greater than every finite time.
class Time {
 public:
  using rep = std::uint64_t;

  constexpr Time() = default;
  constexpr explicit Time(rep ticks) : ticks_(ticks) {}

  static constexpr Time zero() { return Time(0); }
  static constexpr Time infinity() { return Time(kInfinite); }

  constexpr bool is_infinite() const { return ticks_ == kInfinite; }
  constexpr bool is_finite() const { return ticks_ != kInfinite; }
  constexpr rep ticks() const { return ticks_; }

  constexpr auto operator<=>(const Time&) const = default;

  /// Saturates at infinity.
  friend constexpr Time operator+(Time a, Time b) {
    if (a.is_infinite() || b.is_infinite()) return infinity();
    if (a.ticks_ > kInfinite - 1 - b.ticks_) return infinity();
    return Time(a.ticks_ + b.ticks_);
  }

  /// `a - b` for b <= a. Infinity minus a finite time stays infinite.
  friend constexpr Time operator-(Time a, Time b) {
    if (a.is_infinite()) return infinity();
    return Time(a.ticks_ - b.ticks_);
  }

 private:
  static constexpr rep kInfinite = std::numeric_limits<rep>::max();
  rep ticks_ = 0;
};

/// Ticks per model time unit. Must be a power of ten so every tick has an
/// exact decimal rendering.
using TickScale = std::uint64_t;

bool is_valid_tick_scale(TickScale scale);

/// Normalizes a decimal literal ("007.50" -> "7.5", "-0" -> "0").
/// Returns nullopt if `text` is not `-?digits(.digits)?`.
std::optional<std::string> canonical_decimal(std::string_view text);

/// Converts a non-negative decimal literal to ticks. Fails when the value is
/// negative, malformed, overflows, or is not a whole number of ticks.
std::optional<Time::rep> decimal_to_ticks(std::string_view text, TickScale scale);

/// Renders ticks in model units ("inf" for infinity).
std::string format_time(Time t, TickScale scale = 1);

}  // namespace actsim
