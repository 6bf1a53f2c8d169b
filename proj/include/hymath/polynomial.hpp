#pragma once

#include <map>
#include <vector>

#include <hymath/expr.hpp>
#include <hymath/rational.hpp>

namespace hymath {

/// Multivariate polynomial over exact rationals. A monomial is the exponent
/// vector over X1, X2, ... with trailing zeros trimmed.
class Polynomial
{
public:
  using Monomial = std::vector<int>;

  Polynomial() = default;
  static Polynomial constant(const Rational& value);
  static Polynomial variable(int index);

  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial scaled(const Rational& factor) const;

  /// True iff this == c * other for some nonzero c (both zero counts as proportional).
  bool proportional_to(const Polynomial& other) const;

  bool operator==(const Polynomial&) const = default;

private:
  void add_term(Monomial monomial, const Rational& coefficient);

  std::map<Monomial, Rational> terms_;
};

struct RationalFunction
{
  Polynomial numerator;
  Polynomial denominator;
};

/// Builds num/den for an expression without Equ. Throws EvalError when a
/// denominator is identically zero.
RationalFunction to_rational_function(const ExprTree& tree);

} // namespace hymath
