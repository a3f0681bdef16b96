#pragma once

#include <cstdint>
#include <string>

#include <boost/rational.hpp>
#include <fmt/format.h>

namespace usim {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

// Fixed four fraction digits; every report prints rationals this way.
inline std::string to_decimal(const Rational& r) { return fmt::format("{:.4f}", to_double(r)); }

inline std::string to_decimal(double v) { return fmt::format("{:.4f}", v); }

inline std::string to_fraction(const Rational& r) {
  return fmt::format("{}/{}", r.numerator(), r.denominator());
}

// Harmonic mean with the 0-when-either-is-0 convention.
inline Rational harmonic_mean(const Rational& a, const Rational& b) {
  if (a == Rational(0) || b == Rational(0)) return Rational(0);
  return Rational(2) * a * b / (a + b);
}

}  // namespace usim
