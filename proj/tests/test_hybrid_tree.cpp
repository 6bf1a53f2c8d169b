#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include <hymath/hybrid_tree.hpp>

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

TextMathTree leaf(const ExprTree& y, std::size_t b, std::size_t e) { return TextMathTree::leaf(y.kind(), {b, e}); }

std::string key(const TextMathTree& t)
{
  std::string out = t.kind.label() + "/" + t.pattern.name();
  for (const auto& s : t.segments)
    out += "[" + std::to_string(s.begin) + "," + std::to_string(s.end) + ")";
  for (const auto& c : t.children)
    out += "(" + key(c) + ")";
  return out;
}

// Generate-and-test oracle: every pattern choice per operator node, every
// split of the text into the resulting slots, kept when is_valid accepts it.
struct Skeleton
{
  const ExprTree* y;
  WordPattern pattern;
  std::vector<Skeleton> kids;
};

std::vector<Skeleton> skeletons(const ExprTree& y)
{
  if (y.is_leaf())
    return {Skeleton{&y, WordPattern::from_name("w"), {}}};
  std::vector<Skeleton> out;
  const auto lefts = skeletons(y.left());
  const auto rights = skeletons(y.right());
  for (const auto& p : enumerate_patterns(2))
    for (const auto& a : lefts)
      for (const auto& b : rights)
        out.push_back(Skeleton{&y, p, {a, b}});
  return out;
}

std::size_t slot_count(const Skeleton& s)
{
  if (s.kids.empty())
    return 1;
  std::size_t n = 0;
  for (auto e : s.pattern.elements())
    n += e == PatternElement::W ? 1 : slot_count(s.kids[e == PatternElement::A ? 0 : 1]);
  return n;
}

TextMathTree realize(const Skeleton& s, const std::vector<TokenSpan>& spans, std::size_t& next)
{
  if (s.kids.empty())
    return TextMathTree::leaf(s.y->kind(), spans[next++]);
  std::vector<TokenSpan> segments;
  std::optional<TextMathTree> a, b;
  for (auto e : s.pattern.elements()) {
    if (e == PatternElement::W)
      segments.push_back(spans[next++]);
    else if (e == PatternElement::A)
      a = realize(s.kids[0], spans, next);
    else
      b = realize(s.kids[1], spans, next);
  }
  return TextMathTree::binary(s.y->symbol(), s.pattern, segments, *a, *b);
}

std::set<std::string> generate_and_test(const Tokens& x, const ExprTree& y, const std::vector<Quantity>& q)
{
  std::set<std::string> out;
  const std::size_t n = x.size();
  for (const auto& s : skeletons(y)) {
    const std::size_t k = slot_count(s);
    if (k > n)
      continue;
    // choose k-1 cut points among 1..n-1
    std::vector<int> pick(n - 1, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k - 1), 1);
    do {
      std::vector<TokenSpan> spans;
      std::size_t start = 0;
      for (std::size_t c = 1; c < n; ++c)
        if (pick[c - 1]) {
          spans.push_back({start, c});
          start = c;
        }
      spans.push_back({start, n});
      std::size_t next = 0;
      const TextMathTree t = realize(s, spans, next);
      if (is_valid(t, x, y, q))
        out.insert(key(t));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

} // namespace

TEST_CASE("yields of a two-level addition tree and its alternative")
{
  const Tokens x =
    split("mia picked 7 pears , lee picked 3 pears and sam picked 6 pears . how many pears in all ?");
  const auto q = detect_quantities(x);
  const ExprTree y = parse_expression("7+(3+6)");

  // words attached where they belong
  const TextMathTree good = TextMathTree::binary(
    Symbol::Add, WordPattern::from_name("wAwBw"), {{0, 2}, {4, 5}, {14, 21}}, leaf(y.left(), 2, 4),
    TextMathTree::binary(Symbol::Add, WordPattern::from_name("wAwB"), {{5, 7}, {9, 12}}, leaf(y.right().left(), 7, 9),
                         leaf(y.right().right(), 12, 14)));
  // valid but with the question words swallowed by a leaf
  const TextMathTree poor = TextMathTree::binary(
    Symbol::Add, WordPattern::from_name("AwB"), {{4, 5}}, leaf(y.left(), 0, 4),
    TextMathTree::binary(Symbol::Add, WordPattern::from_name("AB"), {}, leaf(y.right().left(), 5, 9),
                         leaf(y.right().right(), 9, 21)));

  for (const auto* t : {&good, &poor}) {
    CHECK(yield_text(*t, x) == x);
    CHECK(yield_expr(*t) == y);
    CHECK(is_valid(*t, x, y, q));
    std::vector<std::size_t> all(x.size());
    std::iota(all.begin(), all.end(), 0);
    CHECK(yield_positions(*t) == all);
  }

  // shifting one w span breaks the yield
  TextMathTree shifted = good;
  shifted.segments[1] = {5, 6};
  CHECK_FALSE(is_valid(shifted, x, y, q));
  CHECK_FALSE(is_valid(good, x, parse_expression("7+(6+3)"), q));
}

TEST_CASE("single leaf yields")
{
  const Tokens x = split("5 apples");
  const TextMathTree t = TextMathTree::leaf(NodeKind::con(5), {0, 2});
  CHECK(yield_text(t, x) == x);
  CHECK(yield_expr(t) == ExprTree::con(5));
  CHECK(is_valid(t, x, ExprTree::con(5), detect_quantities(x)));
  CHECK(dump(t, x) == "Con(5) w {5 apples}\n");
}

TEST_CASE("reordered subtraction inside an equation")
{
  const Tokens x = split("3 times a number is 11 less than 5 times another number .");
  const auto q = detect_quantities(x);
  REQUIRE(q.size() == 3);
  const ExprTree y = parse_expression("(3*X1)=((5*X2)-11)");
  const TextMathTree lhs = TextMathTree::binary(Symbol::Mul, WordPattern::from_name("AwB"), {{1, 2}},
                                                TextMathTree::leaf(NodeKind::con(3), {0, 1}),
                                                TextMathTree::leaf(NodeKind::variable(1), {2, 4}));
  const TextMathTree times = TextMathTree::binary(Symbol::Mul, WordPattern::from_name("AwB"), {{9, 10}},
                                                  TextMathTree::leaf(NodeKind::con(5), {8, 9}),
                                                  TextMathTree::leaf(NodeKind::variable(2), {10, 12}));
  const TextMathTree less = TextMathTree::binary(Symbol::Sub, WordPattern::from_name("BwA"), {{6, 8}}, times,
                                                 TextMathTree::leaf(NodeKind::con(11), {5, 6}));
  const TextMathTree t =
    TextMathTree::binary(Symbol::Equ, WordPattern::from_name("AwBw"), {{4, 5}, {12, 13}}, lhs, less);
  CHECK(yield_text(t, x) == x);
  CHECK(yield_expr(t) == y);
  CHECK(is_valid(t, x, y, q));

  // representable without inverse operators: a shorter version keeps the
  // enumeration small
  const Tokens shortx = split("X is 11 less than 5 X");
  const ExprTree shorty = parse_expression("5-11");
  const auto trees = enumerate_joint(shortx, shorty, detect_quantities(shortx));
  CHECK_FALSE(trees.empty());
  for (const auto& tree : trees)
    CHECK(reorders(tree.pattern));
}

TEST_CASE("enumerate_joint examples")
{
  {
    const Tokens x = split("a 3 b 4");
    const auto q = detect_quantities(x);
    const auto trees = enumerate_joint(x, parse_expression("3-4"), q);
    CHECK(trees.size() == 6);  // brute force over span partitions and the 16 patterns
    CHECK(enumerate_joint(x, parse_expression("4-3"), q).size() == 6);
    for (const auto& t : enumerate_joint(x, parse_expression("3+4"), q))
      CHECK(is_valid(t, x, parse_expression("3+4"), q));
  }
  {
    const Tokens x = split("3 4");
    const auto trees = enumerate_joint(x, parse_expression("3+4"), detect_quantities(x));
    REQUIRE(trees.size() == 1);
    CHECK(trees[0].pattern.name() == "AB");
    CHECK(trees[0].children[0].segments == std::vector<TokenSpan>{{0, 1}});
    CHECK(trees[0].children[1].segments == std::vector<TokenSpan>{{1, 2}});
  }
  CHECK(enumerate_joint(split("a 3 b"), parse_expression("3+4"), detect_quantities(split("a 3 b"))).empty());
  CHECK_THROWS_AS(enumerate_joint(split("1 2 3 4 5 6 7 8 9 10 11 12 13"), parse_expression("1+2"),
                                  detect_quantities(split("1 2 3 4 5 6 7 8 9 10 11 12 13"))),
                  std::invalid_argument);
  const Tokens x = split("a 3 b c d 4 e f");
  CHECK_THROWS_AS(enumerate_joint(x, parse_expression("3+4"), detect_quantities(x), 5), EnumerationCapExceeded);
}

TEST_CASE("enumerate_joint matches generate-and-test on small inputs")
{
  oracle::Generator g(23);
  TaskConfig task;
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int length = g.uniform(2, 7);
    const int quantities = g.uniform(1, std::min(3, length));
    const Instance in = g.instance(length, quantities, "t");
    const auto q = detect_quantities(in.text);
    const auto space = oracle::all_expressions(q, task);
    const ExprTree& y = space[static_cast<std::size_t>(g.uniform(0, static_cast<int>(space.size()) - 1))];
    if (y.node_count() > 3 && length > 6)
      continue;  // keep the brute force small
    const auto trees = enumerate_joint(in.text, y, q);
    std::set<std::string> got;
    for (const auto& t : trees) {
      CHECK(is_valid(t, in.text, y, q));
      std::vector<std::size_t> all(in.text.size());
      std::iota(all.begin(), all.end(), 0);
      CHECK(yield_positions(t) == all);
      got.insert(key(t));
    }
    CHECK(got.size() == trees.size());
    CHECK(got == generate_and_test(in.text, y, q));
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("malformed trees")
{
  const Tokens x = split("a 3 b 4");
  const TextMathTree overlap =
    TextMathTree::binary(Symbol::Add, WordPattern::from_name("AwB"), {{1, 3}}, TextMathTree::leaf(NodeKind::con(3), {0, 2}),
                         TextMathTree::leaf(NodeKind::con(4), {3, 4}));
  CHECK_THROWS_AS(yield_positions(overlap), MalformedTree);
  CHECK_FALSE(is_valid(overlap, x, parse_expression("3+4"), detect_quantities(x)));
}
