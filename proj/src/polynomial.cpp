#include <hymath/polynomial.hpp>

namespace hymath {

namespace {

Polynomial::Monomial trimmed(Polynomial::Monomial m)
{
  while (!m.empty() && m.back() == 0)
    m.pop_back();
  return m;
}

} // namespace

Polynomial Polynomial::constant(const Rational& value)
{
  Polynomial p;
  p.add_term({}, value);
  return p;
}

Polynomial Polynomial::variable(int index)
{
  Polynomial p;
  Monomial m(static_cast<std::size_t>(index), 0);
  m[index - 1] = 1;
  p.add_term(std::move(m), Rational(1));
  return p;
}

void Polynomial::add_term(Monomial monomial, const Rational& coefficient)
{
  if (coefficient == 0)
    return;
  monomial = trimmed(std::move(monomial));
  auto [it, inserted] = terms_.emplace(monomial, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0)
      terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& other) const
{
  Polynomial out = *this;
  for (const auto& [m, c] : other.terms_)
    out.add_term(m, c);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const
{
  return *this + other.scaled(Rational(-1));
}

Polynomial Polynomial::operator*(const Polynomial& other) const
{
  Polynomial out;
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      Monomial m(std::max(ma.size(), mb.size()), 0);
      for (std::size_t i = 0; i < ma.size(); ++i)
        m[i] += ma[i];
      for (std::size_t i = 0; i < mb.size(); ++i)
        m[i] += mb[i];
      out.add_term(std::move(m), ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::scaled(const Rational& factor) const
{
  Polynomial out;
  if (factor == 0)
    return out;
  for (const auto& [m, c] : terms_)
    out.terms_.emplace(m, c * factor);
  return out;
}

bool Polynomial::proportional_to(const Polynomial& other) const
{
  if (is_zero() || other.is_zero())
    return is_zero() && other.is_zero();
  if (terms_.size() != other.terms_.size())
    return false;
  const auto& [lead, coefficient] = *terms_.begin();
  const auto found = other.terms_.find(lead);
  if (found == other.terms_.end())
    return false;
  const Rational ratio = coefficient / found->second;
  return *this == other.scaled(ratio);
}

RationalFunction to_rational_function(const ExprTree& tree)
{
  switch (tree.symbol()) {
  case Symbol::Con:
    return {Polynomial::constant(tree.kind().value), Polynomial::constant(1)};
  case Symbol::Var:
    return {Polynomial::variable(tree.kind().var), Polynomial::constant(1)};
  case Symbol::Equ:
    throw EvalError("equation inside rational function");
  default:
    break;
  }

  RationalFunction a = to_rational_function(tree.left());
  RationalFunction b = to_rational_function(tree.right());
  if (tree.symbol() == Symbol::SubR || tree.symbol() == Symbol::DivR)
    std::swap(a, b);

  switch (tree.symbol()) {
  case Symbol::Add:
    return {a.numerator * b.denominator + b.numerator * a.denominator, a.denominator * b.denominator};
  case Symbol::Sub:
  case Symbol::SubR:
    return {a.numerator * b.denominator - b.numerator * a.denominator, a.denominator * b.denominator};
  case Symbol::Mul:
    return {a.numerator * b.numerator, a.denominator * b.denominator};
  case Symbol::Div:
  case Symbol::DivR:
    if (b.numerator.is_zero())
      throw EvalError("division by zero");
    return {a.numerator * b.denominator, a.denominator * b.numerator};
  default:
    throw EvalError("unexpected symbol");
  }
}

} // namespace hymath
