#include "actsim/time.hpp"

#include <cctype>

namespace actsim {

namespace {

struct Decimal {
  bool negative = false;
  std::string integral;    // no leading zeros, possibly empty
  std::string fractional;  // no trailing zeros, possibly empty
};

std::optional<Decimal> split_decimal(std::string_view text) {
  Decimal d;
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') {
    d.negative = true;
    ++i;
  }
  std::size_t int_begin = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == int_begin) return std::nullopt;
  std::string_view integral = text.substr(int_begin, i - int_begin);
  std::string_view fractional;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t frac_begin = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == frac_begin) return std::nullopt;
    fractional = text.substr(frac_begin, i - frac_begin);
  }
  if (i != text.size()) return std::nullopt;

  while (!integral.empty() && integral.front() == '0') integral.remove_prefix(1);
  while (!fractional.empty() && fractional.back() == '0') fractional.remove_suffix(1);
  d.integral = std::string(integral);
  d.fractional = std::string(fractional);
  if (d.integral.empty() && d.fractional.empty()) d.negative = false;
  return d;
}

}  // namespace

bool is_valid_tick_scale(TickScale scale) {
  if (scale == 0) return false;
  while (scale % 10 == 0) scale /= 10;
  return scale == 1;
}

std::optional<std::string> canonical_decimal(std::string_view text) {
  auto d = split_decimal(text);
  if (!d) return std::nullopt;
  std::string out;
  if (d->negative) out += '-';
  out += d->integral.empty() ? "0" : d->integral;
  if (!d->fractional.empty()) {
    out += '.';
    out += d->fractional;
  }
  return out;
}

std::optional<Time::rep> decimal_to_ticks(std::string_view text, TickScale scale) {
  if (!is_valid_tick_scale(scale)) return std::nullopt;
  auto d = split_decimal(text);
  if (!d || d->negative) return std::nullopt;

  std::size_t scale_digits = 0;
  for (TickScale s = scale; s > 1; s /= 10) ++scale_digits;
  if (d->fractional.size() > scale_digits) return std::nullopt;

  // value * scale = integral * scale + fractional * 10^(scale_digits - len)
  std::string digits = d->integral + d->fractional;
  digits.append(scale_digits - d->fractional.size(), '0');
  constexpr Time::rep kLimit = std::numeric_limits<Time::rep>::max() - 1;
  Time::rep value = 0;
  for (char c : digits) {
    Time::rep digit = static_cast<Time::rep>(c - '0');
    if (value > (kLimit - digit) / 10) return std::nullopt;
    value = value * 10 + digit;
  }
  return value;
}

std::string format_time(Time t, TickScale scale) {
  if (t.is_infinite()) return "inf";
  if (scale <= 1) return std::to_string(t.ticks());
  std::string out = std::to_string(t.ticks() / scale);
  Time::rep rem = t.ticks() % scale;
  if (rem == 0) return out;
  std::string frac = std::to_string(rem);
  std::size_t width = 0;
  for (TickScale s = scale; s > 1; s /= 10) ++width;
  frac.insert(0, width - frac.size(), '0');
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  return out + "." + frac;
}

}  // namespace actsim
