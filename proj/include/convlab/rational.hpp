#pragma once

// Exact arithmetic helpers shared by every module.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace convlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses a decimal literal ("0.05", "-1.25e-3", "3") or a fraction ("1/3")
/// into the rational number it denotes. Throws DomainError on malformed text.
Rational parse_rational(std::string_view text);

/// The rational denoted by the shortest decimal string that round-trips to
/// `value`. So 0.1 maps to 1/10, not to the binary expansion of the double.
Rational rationalize(double value);

double to_double(const Rational& value);

/// Shortest round-trip decimal text of `value`.
std::string format_double(double value);

/// Decimal rendering of a rational for reports: the fraction when the
/// denominator is not a power-of-ten divisor, otherwise the decimal literal.
std::string format_rational(const Rational& value);

Rational abs(const Rational& value);

Rational pow(const Rational& base, unsigned exponent);

/// floor(value * 2^64), clamped to [0, 2^64 - 1]; used to turn a probability
/// into an integer threshold for uniform 64-bit draws.
std::uint64_t scaled_threshold(const Rational& probability);

} // namespace convlab
