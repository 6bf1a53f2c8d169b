#include <hymath/rational.hpp>

#include <charconv>
#include <cctype>
#include <system_error>

namespace hymath {

using boost::multiprecision::cpp_int;

std::optional<Rational> parse_decimal(std::string_view text)
{
  cpp_int numerator = 0;
  cpp_int denominator = 1;
  bool seen_digit = false;
  bool seen_point = false;
  bool last_was_comma = false;

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      numerator = numerator * 10 + (c - '0');
      if (seen_point)
        denominator *= 10;
      seen_digit = true;
      last_was_comma = false;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
      last_was_comma = false;
    } else if (c == ',' && !seen_point && seen_digit && !last_was_comma) {
      // thousands separator: exactly three digits must follow
      std::size_t digits = 0;
      while (i + 1 + digits < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1 + digits])))
        ++digits;
      if (digits != 3)
        return std::nullopt;
      last_was_comma = true;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit || last_was_comma)
    return std::nullopt;
  return Rational(numerator, denominator);
}

Rational rational_from_double(double value)
{
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  std::string text(buffer, result.ptr);

  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.erase(0, 1);
  }
  int exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string::npos) {
    exponent = std::stoi(text.substr(e + 1));
    text.resize(e);
  }
  auto parsed = parse_decimal(text);
  if (!parsed)
    return Rational(0);
  Rational scale = 1;
  for (int i = 0; i < std::abs(exponent); ++i)
    scale *= 10;
  Rational out = exponent >= 0 ? Rational(*parsed * scale) : Rational(*parsed / scale);
  return negative ? Rational(-out) : out;
}

bool is_integer(const Rational& value)
{
  return boost::multiprecision::denominator(value) == 1;
}

bool is_terminating(const Rational& value)
{
  cpp_int d = boost::multiprecision::denominator(value);
  while (d % 2 == 0)
    d /= 2;
  while (d % 5 == 0)
    d /= 5;
  return d == 1;
}

std::string format_rational(const Rational& value)
{
  const cpp_int num = boost::multiprecision::numerator(value);
  const cpp_int den = boost::multiprecision::denominator(value);
  if (den == 1)
    return num.str();
  if (!is_terminating(value))
    return num.str() + "/" + den.str();

  // scale to an integer by the smallest power of ten
  cpp_int scaled = num < 0 ? cpp_int(-num) : num;
  cpp_int d = den;
  int places = 0;
  cpp_int power = 1;
  while ((power % d) != 0) {
    power *= 10;
    ++places;
  }
  scaled *= power / d;
  std::string digits = scaled.str();
  if (static_cast<int>(digits.size()) <= places)
    digits.insert(0, places - digits.size() + 1, '0');
  digits.insert(digits.size() - places, ".");
  return (num < 0 ? "-" : "") + digits;
}

double to_double(const Rational& value)
{
  return value.convert_to<double>();
}

} // namespace hymath
