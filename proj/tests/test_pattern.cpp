#include <doctest.h>

#include <algorithm>
#include <set>

#include <hymath/pattern.hpp>

using namespace hymath;

TEST_CASE("enumerate_patterns")
{
  const auto leaf = enumerate_patterns(0);
  REQUIRE(leaf.size() == 1);
  CHECK(leaf[0].name() == "w");

  const auto binary = enumerate_patterns(2);
  CHECK(binary.size() == 16);
  std::set<std::string> names;
  for (const auto& p : binary) {
    names.insert(p.name());
    CHECK(std::count(p.elements().begin(), p.elements().end(), PatternElement::A) == 1);
    CHECK(std::count(p.elements().begin(), p.elements().end(), PatternElement::B) == 1);
    for (std::size_t i = 1; i < p.size(); ++i)
      CHECK_FALSE((p[i] == PatternElement::W && p[i - 1] == PatternElement::W));
  }
  CHECK(names.size() == 16);
  for (const char* n : {"wAwBw", "ABw", "BwA", "AB", "BA", "wBwAw"})
    CHECK(names.count(n) == 1);

  CHECK(std::count_if(binary.begin(), binary.end(), reorders) == 8);
  CHECK_THROWS_AS(enumerate_patterns(1), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_patterns(3), std::invalid_argument);
}

TEST_CASE("reorders")
{
  CHECK(reorders(WordPattern::from_name("BwA")));
  CHECK_FALSE(reorders(WordPattern::from_name("AwB")));
  CHECK_FALSE(reorders(WordPattern::from_name("ABw")));
  for (const auto& p : enumerate_patterns(2)) {
    const auto a = std::find(p.elements().begin(), p.elements().end(), PatternElement::A);
    const auto b = std::find(p.elements().begin(), p.elements().end(), PatternElement::B);
    CHECK(reorders(p) == (b < a));
  }
}

TEST_CASE("pattern names")
{
  CHECK(WordPattern::from_name("wAwBw").word_slots() == 3);
  CHECK(WordPattern::from_name("w").arity() == 0);
  CHECK_THROWS_AS(WordPattern::from_name("wwAB"), std::invalid_argument);
  CHECK_THROWS_AS(WordPattern::from_name("AAB"), std::invalid_argument);
  CHECK_THROWS_AS(WordPattern::from_name("AxB"), std::invalid_argument);
}

TEST_CASE("pattern state advances through each pattern in length steps")
{
  const auto patterns = enumerate_patterns(2);
  for (int i = 0; i < static_cast<int>(patterns.size()); ++i) {
    PatternState s{i, 0};
    int steps = 0;
    while (!s.complete(patterns)) {
      CHECK(s.next(patterns) == patterns[i][static_cast<std::size_t>(s.consumed)]);
      s = s.advanced();
      ++steps;
    }
    CHECK(steps == static_cast<int>(patterns[i].size()));
  }
}

TEST_CASE("pattern set and tries")
{
  const PatternSet all;
  CHECK(all.patterns().size() == 16);
  const PatternSet monotone(true);
  CHECK(monotone.patterns().size() == 8);
  for (const auto& p : monotone.patterns())
    CHECK_FALSE(reorders(p));
  CHECK(monotone.index_of(WordPattern::from_name("BwA")) == -1);
  CHECK(monotone.trie(true).nodes().empty());

  // every allowed pattern is a terminal of its orientation's trie, reached by
  // walking parents back to a root
  for (bool reordering : {false, true}) {
    std::set<std::string> reached;
    const auto& nodes = all.trie(reordering).nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (nodes[k].parent >= 0)
        CHECK(nodes[k].parent < static_cast<int>(k));
      if (nodes[k].terminal < 0)
        continue;
      std::vector<PatternElement> elements;
      for (int at = static_cast<int>(k); at >= 0; at = nodes[at].parent)
        elements.insert(elements.begin(), nodes[at].element);
      const WordPattern p(elements);
      CHECK(all.patterns()[nodes[k].terminal] == p);
      CHECK(reorders(p) == reordering);
      reached.insert(p.name());
    }
    CHECK(reached.size() == 8);
  }
}
