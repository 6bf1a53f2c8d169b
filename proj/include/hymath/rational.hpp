#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace hymath {

using Rational = boost::multiprecision::cpp_rational;

/// Parses an unsigned decimal literal ("7", "0.036", "1,200", ".5") exactly.
/// Returns nullopt when the text is not a decimal number.
std::optional<Rational> parse_decimal(std::string_view text);

/// Shortest round-tripping decimal of a double, converted exactly.
Rational rational_from_double(double value);

bool is_integer(const Rational& value);

/// True when the value has a finite decimal expansion (denominator 2^a 5^b).
bool is_terminating(const Rational& value);

/// Decimal text for terminating values ("0.036", "16"); "n/d" otherwise.
std::string format_rational(const Rational& value);

double to_double(const Rational& value);

} // namespace hymath
