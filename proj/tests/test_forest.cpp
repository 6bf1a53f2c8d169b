#include <doctest.h>

#include <set>

#include <hymath/forest.hpp>

#include "oracle.hpp"

using namespace hymath;

namespace {

Tokens split(const std::string& text)
{
  std::istringstream in(text);
  Tokens out;
  for (std::string w; in >> w;)
    out.push_back(w);
  return out;
}

std::set<std::string> serialized(const std::vector<ExprTree>& trees)
{
  std::set<std::string> out;
  for (const auto& t : trees)
    out.insert(serialize(t));
  return out;
}

std::vector<Quantity> quantities_of(std::initializer_list<int> values)
{
  std::vector<Quantity> q;
  std::size_t token = 0;
  for (int v : values) {
    q.push_back(Quantity{token, Rational(v), std::nullopt, std::to_string(v)});
    token += 2;
  }
  return q;
}

} // namespace

TEST_CASE("detect_quantities")
{
  const auto q = detect_quantities(split("he paid $ 1,234.50 for 3/4 of 12 boxes , five of them 20% off and 7 percent tax"));
  std::vector<std::pair<std::size_t, Rational>> got;
  for (const auto& x : q)
    got.emplace_back(x.token, x.value);
  const std::vector<std::pair<std::size_t, Rational>> expected{
    {3, Rational(2469, 2)}, {5, Rational(3, 4)}, {7, Rational(12)}, {10, Rational(5)},
    {13, Rational(1, 5)},   {16, Rational(7, 100)}};
  CHECK(got == expected);

  CHECK(detect_quantities(split("$5")).at(0).value == 5);
  CHECK(detect_quantities(split("one of the apples")).empty());
  CHECK(detect_quantities(split("no numbers here")).empty());
  CHECK(detect_quantities(split("twelve eggs")).at(0).value == 12);
}

TEST_CASE("leaf_compat")
{
  const Tokens x = split("a 3 b 4 c");
  const auto q = detect_quantities(x);
  CHECK(leaf_compat(NodeKind::con(3), {0, 2}, q));
  CHECK(leaf_compat(NodeKind::con(3), {1, 2}, q));
  CHECK_FALSE(leaf_compat(NodeKind::con(3), {0, 4}, q));  // two quantities
  CHECK_FALSE(leaf_compat(NodeKind::con(4), {0, 2}, q));  // wrong value
  CHECK_FALSE(leaf_compat(NodeKind::con(3), {2, 3}, q));  // none
  CHECK(leaf_compat(NodeKind::variable(1), {2, 3}, q));
  CHECK(leaf_compat(NodeKind::variable(1), {4, 5}, q));
  CHECK_FALSE(leaf_compat(NodeKind::variable(1), {0, 2}, q));
}

TEST_CASE("forest derivations equal the brute-force expression set")
{
  oracle::Generator g(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int count = g.uniform(1, 4);
    std::vector<Quantity> q;
    for (int i = 0; i < count; ++i)
      q.push_back(Quantity{static_cast<std::size_t>(2 * i), Rational(g.uniform(1, 5)), std::nullopt, ""});

    TaskConfig task;
    task.operators = g.operators(g.uniform(1, 4));
    task.inverse_ops = g.coin();
    const int variant = g.uniform(0, 3);
    if (variant == 1)
      task.var_position = VarPosition::Prefix;
    else if (variant == 2)
      task.var_position = VarPosition::Suffix;
    else if (variant == 3 && count <= 3)
      task.max_vars = g.uniform(1, 2);
    task.require_all_quantities = g.uniform(0, 3) == 0;

    const auto expected = serialized(oracle::all_expressions(q, task));
    HypothesisForest forest;
    try {
      forest = build_forest(q, task);
    } catch (const EmptyHypothesisSpace&) {
      CHECK(expected.empty());
      continue;
    }
    const auto trees = forest.derivations();
    CHECK(serialized(trees) == expected);
    CHECK(forest.derivation_count() == trees.size());
  }
}

TEST_CASE("forest shape examples")
{
  const auto q = quantities_of({2, 5, 9});
  TaskConfig all;
  all.require_all_quantities = true;
  for (const auto& t : build_forest(q, all).derivations())
    CHECK(t.leaves().size() == 3);

  TaskConfig plain;
  TaskConfig inverse;
  inverse.inverse_ops = true;
  const auto a = serialized(build_forest(q, plain).derivations());
  const auto b = serialized(build_forest(q, inverse).derivations());
  CHECK(a.size() < b.size());
  for (const auto& s : a)
    CHECK(b.count(s) == 1);

  // wrapping does not change the number of candidates
  const auto base = build_forest(q, plain).derivation_count();
  for (VarPosition pos : {VarPosition::Prefix, VarPosition::Suffix}) {
    TaskConfig wrapped;
    wrapped.var_position = pos;
    const auto f = build_forest(q, wrapped);
    CHECK(f.derivation_count() == base);
    for (const auto& t : f.derivations()) {
      REQUIRE(t.symbol() == Symbol::Equ);
      const ExprTree& v = pos == VarPosition::Prefix ? t.left() : t.right();
      CHECK(v == ExprTree::var(1));
    }
  }

  CHECK_THROWS_AS(build_forest({}, plain), EmptyHypothesisSpace);
  CHECK_THROWS_AS(build_forest(q, plain).derivations(3), std::length_error);
}

TEST_CASE("gold forest and adapt_gold")
{
  const Tokens x = split("jan has 9 pens and gives 4 away");
  const auto q = detect_quantities(x);
  TaskConfig task;
  const auto gold = gold_forest(parse_expression("9-4"), q, task);
  const auto trees = gold.derivations();
  REQUIRE(trees.size() == 1);
  CHECK(serialize(trees[0]) == "(9-4)");
  CHECK_THROWS_AS(gold_forest(parse_expression("9-5"), q, task), UnreachableGold);

  TaskConfig inverse;
  inverse.inverse_ops = true;
  CHECK(adapt_gold(parse_expression("4-9"), q, inverse).symbol() == Symbol::SubR);
  CHECK(adapt_gold(parse_expression("9-4"), q, inverse).symbol() == Symbol::Sub);

  TaskConfig prefix;
  prefix.var_position = VarPosition::Prefix;
  const ExprTree wrapped = adapt_gold(parse_expression("9-4"), q, prefix);
  CHECK(serialize(wrapped) == "(X1=(9-4))");
  CHECK(strip_answer_variable(wrapped, prefix) == parse_expression("9-4"));
}

TEST_CASE("task validation")
{
  TaskConfig bad;
  bad.max_vars = 1;
  bad.var_position = VarPosition::Prefix;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(var_position_from_string(to_string(VarPosition::Suffix)) == VarPosition::Suffix);
  CHECK_THROWS(var_position_from_string("middle"));
}
