#include <doctest.h>

#include <map>

#include <hymath/expr.hpp>
#include <hymath/polynomial.hpp>
#include <hymath/rational.hpp>

#include "oracle.hpp"

using namespace hymath;

namespace {

ExprTree random_tree(oracle::Generator& g, int depth, bool allow_vars, bool inverse)
{
  if (depth == 0 || g.uniform(0, 3) == 0) {
    if (allow_vars && g.uniform(0, 3) == 0)
      return ExprTree::var(g.uniform(1, 2));
    if (g.coin())
      return ExprTree::con(Rational(g.uniform(1, 30)));
    return ExprTree::con(Rational(g.uniform(1, 99), 10));
  }
  static const Symbol plain[] = {Symbol::Add, Symbol::Sub, Symbol::Mul, Symbol::Div};
  static const Symbol all[] = {Symbol::Add, Symbol::Sub, Symbol::Mul, Symbol::Div, Symbol::SubR, Symbol::DivR};
  const Symbol op = inverse ? all[g.uniform(0, 5)] : plain[g.uniform(0, 3)];
  return ExprTree::binary(op, random_tree(g, depth - 1, allow_vars, inverse),
                          random_tree(g, depth - 1, allow_vars, inverse));
}

// Numerator and denominator of t at a point, built by cross-multiplying
// every quotient the way the canonical rational function is.
struct Pair
{
  Rational num, den;
};

Pair pair_at(const ExprTree& t, const std::map<int, Rational>& at)
{
  if (t.symbol() == Symbol::Con)
    return {t.kind().value, 1};
  if (t.symbol() == Symbol::Var)
    return {at.at(t.kind().var), 1};
  Pair l = pair_at(t.left(), at);
  Pair r = pair_at(t.right(), at);
  switch (t.symbol()) {
    case Symbol::Add: return {l.num * r.den + r.num * l.den, l.den * r.den};
    case Symbol::Sub:
    case Symbol::Equ: return {l.num * r.den - r.num * l.den, l.den * r.den};
    case Symbol::SubR: return {r.num * l.den - l.num * r.den, l.den * r.den};
    case Symbol::Mul: return {l.num * r.num, l.den * r.den};
    case Symbol::Div: return {l.num * r.den, l.den * r.num};
    case Symbol::DivR: return {r.num * l.den, r.den * l.num};
    default: return {0, 1};
  }
}

// Plain expressions: equal values. Equations: numerators of lhs - rhs
// proportional at every sampled point (one constant ratio, zeros together).
std::optional<bool> sampled_equivalent(const ExprTree& a, const ExprTree& b, oracle::Generator& g)
{
  std::optional<Rational> ratio;
  bool all_zero = true;
  for (int s = 0; s < 50; ++s) {
    const std::map<int, Rational> at{{1, Rational(g.uniform(-500, 500), g.uniform(1, 37))},
                                     {2, Rational(g.uniform(-500, 500), g.uniform(1, 41))}};
    const Pair pa = pair_at(a, at);
    const Pair pb = pair_at(b, at);
    if (a.symbol() != Symbol::Equ) {
      if (pa.den == 0 || pb.den == 0)
        return std::nullopt;
      return pa.num / pa.den == pb.num / pb.den;
    }
    if ((pa.num == 0) != (pb.num == 0))
      return false;
    if (pa.num == 0)
      continue;
    all_zero = false;
    const Rational r = pa.num / pb.num;
    if (ratio && *ratio != r)
      return false;
    ratio = r;
  }
  if (all_zero)
    return std::nullopt;
  return true;
}

} // namespace

TEST_CASE("parse_expression examples")
{
  const ExprTree t = parse_expression("(7+(3+6))");
  CHECK(t == ExprTree::binary(Symbol::Add, ExprTree::con(7),
                              ExprTree::binary(Symbol::Add, ExprTree::con(3), ExprTree::con(6))));
  CHECK(parse_expression("5") == ExprTree::con(5));

  const ExprTree eq = parse_expression("(3*X1)=(5*X2)-11");
  CHECK(eq == ExprTree::binary(Symbol::Equ, ExprTree::binary(Symbol::Mul, ExprTree::con(3), ExprTree::var(1)),
                               ExprTree::binary(Symbol::Sub,
                                                ExprTree::binary(Symbol::Mul, ExprTree::con(5), ExprTree::var(2)),
                                                ExprTree::con(11))));

  // precedence and left associativity
  CHECK(serialize(parse_expression("1+2*3")) == "(1+(2*3))");
  CHECK(serialize(parse_expression("8-3-2")) == "((8-3)-2)");
  CHECK(serialize(parse_expression("8/4/2")) == "((8/4)/2)");
  CHECK(parse_expression("0.036").kind().value == Rational(36, 1000));
  CHECK(parse_expression("3 -r 5").symbol() == Symbol::SubR);
}

TEST_CASE("parse_expression errors")
{
  CHECK_THROWS_AS(parse_expression("(7+"), ExprError);
  CHECK_THROWS_AS(parse_expression("1=2=3"), ExprError);
  CHECK_THROWS_AS(parse_expression("(1=2)+3"), ExprError);
  CHECK_THROWS_AS(parse_expression(""), ExprError);
  try {
    parse_expression("3+*4");
    FAIL("expected a syntax error");
  } catch (const ExprError& e) {
    CHECK(e.position() == 2);
  }
}

TEST_CASE("serialize examples")
{
  CHECK(serialize(ExprTree::con(5)) == "5");
  CHECK(serialize(parse_expression("7+(3+6)")) == "(7+(3+6))");
  CHECK(serialize(ExprTree::binary(Symbol::Equ, ExprTree::var(1), ExprTree::con(150))) == "(X1=150)");
}

TEST_CASE("evaluate examples")
{
  CHECK(evaluate(parse_expression("(7+(3+6))")) == 16);
  CHECK(evaluate(ExprTree::con(5)) == 5);
  CHECK(evaluate(parse_expression("14/2")) == 7);
  CHECK(evaluate(ExprTree::binary(Symbol::SubR, ExprTree::con(3), ExprTree::con(5))) == 2);
  CHECK(evaluate(ExprTree::binary(Symbol::DivR, ExprTree::con(4), ExprTree::con(2))) == Rational(1, 2));
  CHECK_THROWS_AS(evaluate(parse_expression("1/0")), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expression("X1+1")), EvalError);
  CHECK_THROWS_AS(evaluate(parse_expression("X1=1")), EvalError);
}

TEST_CASE("equivalent examples")
{
  CHECK(equivalent(parse_expression("X1=0.036-0.034"), parse_expression("0.036-0.034=X1")));
  CHECK(equivalent(parse_expression("5-3"), ExprTree::binary(Symbol::SubR, ExprTree::con(3), ExprTree::con(5))));
  CHECK(equivalent(parse_expression("(3*X1)=(5*X2)-11"), parse_expression("(3*X1)+11=5*X2")));
  CHECK_FALSE(equivalent(parse_expression("5/9"), parse_expression("5*9")));
  CHECK_FALSE(equivalent(parse_expression("X1-(0.007*X1)=10842"), parse_expression("X1+(0.007*X1)=10842")));
  CHECK_FALSE(equivalent(parse_expression("X1=1"), parse_expression("X2=1")));  // no renaming
  CHECK(equivalent(parse_expression("2*X1=4"), parse_expression("X1=2")));
  CHECK_FALSE(equivalent(parse_expression("1/0"), parse_expression("1/0")));
}

TEST_CASE("round trip, commutativity, reflexivity and symmetry on random trees")
{
  oracle::Generator g(11);
  for (int i = 0; i < 1000; ++i) {
    const ExprTree t = random_tree(g, 3, false, true);
    CHECK(parse_expression(serialize(t)) == t);
    CHECK(serialize(parse_expression(serialize(t))) == serialize(t));
    try {
      const Rational v = evaluate(t);
      const ExprTree u = random_tree(g, 2, false, false);
      const Rational w = evaluate(u);
      CHECK(evaluate(ExprTree::binary(Symbol::Add, t, u)) == evaluate(ExprTree::binary(Symbol::Add, u, t)));
      CHECK(evaluate(ExprTree::binary(Symbol::Mul, t, u)) == evaluate(ExprTree::binary(Symbol::Mul, u, t)));
      CHECK(v + w == evaluate(ExprTree::binary(Symbol::Add, t, u)));
    } catch (const EvalError&) {
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const ExprTree a = ExprTree::binary(Symbol::Equ, random_tree(g, 2, true, false), random_tree(g, 2, true, false));
    const ExprTree b = ExprTree::binary(Symbol::Equ, random_tree(g, 2, true, false), random_tree(g, 2, true, false));
    const bool aa = equivalent(a, a);
    const bool ab = equivalent(a, b);
    CHECK(ab == equivalent(b, a));
    try {
      to_rational_function(a.left());
      to_rational_function(a.right());
      CHECK(aa);
    } catch (const EvalError&) {
      CHECK_FALSE(aa);
    }
  }
}

TEST_CASE("equivalent agrees with a random-assignment oracle")
{
  oracle::Generator g(5);
  int compared = 0, agreed_true = 0;
  for (int i = 0; i < 600; ++i) {
    const ExprTree l = random_tree(g, 2, true, false);
    const ExprTree r = random_tree(g, 2, true, false);
    ExprTree a = ExprTree::binary(Symbol::Equ, l, r);
    // half the pairs are rewritten forms of the same equation
    ExprTree b = g.coin() ? ExprTree::binary(Symbol::Equ, r, l)
                          : ExprTree::binary(Symbol::Equ, ExprTree::binary(Symbol::Sub, l, r), ExprTree::con(0));
    if (g.uniform(0, 2) == 0)
      b = ExprTree::binary(Symbol::Equ, random_tree(g, 2, true, false), random_tree(g, 2, true, false));
    bool defined = true;
    try {
      to_rational_function(ExprTree::binary(Symbol::Sub, a.left(), a.right()));
      to_rational_function(ExprTree::binary(Symbol::Sub, b.left(), b.right()));
    } catch (const EvalError&) {
      defined = false;
    }
    if (!defined)
      continue;
    const auto expected = sampled_equivalent(a, b, g);
    if (!expected)
      continue;
    ++compared;
    agreed_true += *expected ? 1 : 0;
    CHECK_MESSAGE(equivalent(a, b) == *expected, serialize(a), " vs ", serialize(b));
  }
  CHECK(compared > 300);
  CHECK(agreed_true > 100);
}

TEST_CASE("rational formatting and parsing")
{
  CHECK(parse_decimal("1,234.5") == Rational(2469, 2));
  CHECK_FALSE(parse_decimal("1,23").has_value());
  CHECK(format_rational(Rational(1, 3)) == "1/3");
  CHECK(format_rational(Rational(-7, 4)) == "-1.75");
  CHECK(format_rational(Rational(36, 1000)) == "0.036");
  CHECK(rational_from_double(0.1) == Rational(1, 10));
}
