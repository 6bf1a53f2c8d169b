#include <hymath/pattern.hpp>

#include <algorithm>
#include <stdexcept>

namespace hymath {

WordPattern::WordPattern(std::vector<PatternElement> elements) : elements_(std::move(elements))
{
  for (std::size_t i = 1; i < elements_.size(); ++i)
    if (elements_[i] == PatternElement::W && elements_[i - 1] == PatternElement::W)
      throw std::invalid_argument("adjacent w elements in pattern");
  const auto a = std::count(elements_.begin(), elements_.end(), PatternElement::A);
  const auto b = std::count(elements_.begin(), elements_.end(), PatternElement::B);
  if (a != b || a > 1)
    throw std::invalid_argument("pattern needs exactly one A and one B, or neither");
  if (elements_.empty())
    throw std::invalid_argument("empty pattern");
}

WordPattern WordPattern::from_name(std::string_view name)
{
  std::vector<PatternElement> elements;
  for (char c : name) {
    switch (c) {
    case 'w': elements.push_back(PatternElement::W); break;
    case 'A': elements.push_back(PatternElement::A); break;
    case 'B': elements.push_back(PatternElement::B); break;
    default: throw std::invalid_argument("bad pattern character in '" + std::string(name) + "'");
    }
  }
  return WordPattern(std::move(elements));
}

int WordPattern::arity() const
{
  return std::count(elements_.begin(), elements_.end(), PatternElement::A) * 2;
}

int WordPattern::word_slots() const
{
  return static_cast<int>(std::count(elements_.begin(), elements_.end(), PatternElement::W));
}

std::string WordPattern::name() const
{
  std::string out;
  for (auto e : elements_)
    out += e == PatternElement::W ? 'w' : e == PatternElement::A ? 'A' : 'B';
  return out;
}

std::vector<WordPattern> enumerate_patterns(int arity)
{
  if (arity == 0)
    return {WordPattern({PatternElement::W})};
  if (arity != 2)
    throw std::invalid_argument("unsupported arity " + std::to_string(arity));

  std::vector<WordPattern> out;
  for (const bool reordered : {false, true}) {
    const PatternElement first = reordered ? PatternElement::B : PatternElement::A;
    const PatternElement second = reordered ? PatternElement::A : PatternElement::B;
    for (int mask = 0; mask < 8; ++mask) {
      std::vector<PatternElement> e;
      if (mask & 4)
        e.push_back(PatternElement::W);
      e.push_back(first);
      if (mask & 2)
        e.push_back(PatternElement::W);
      e.push_back(second);
      if (mask & 1)
        e.push_back(PatternElement::W);
      out.emplace_back(std::move(e));
    }
  }
  return out;
}

bool reorders(const WordPattern& pattern)
{
  for (auto e : pattern.elements()) {
    if (e == PatternElement::A)
      return false;
    if (e == PatternElement::B)
      return true;
  }
  return false;
}

bool PatternState::complete(const std::vector<WordPattern>& patterns) const
{
  return consumed == static_cast<int>(patterns.at(pattern).size());
}

PatternElement PatternState::next(const std::vector<WordPattern>& patterns) const
{
  return patterns.at(pattern)[consumed];
}

PatternTrie::PatternTrie(const std::vector<WordPattern>& patterns, const std::vector<int>& members)
{
  // breadth-first insertion: depth d nodes all precede depth d+1 nodes
  std::size_t max_depth = 0;
  for (int p : members)
    max_depth = std::max(max_depth, patterns[p].size());

  std::vector<std::vector<int>> node_of(patterns.size());  // node id per prefix length
  for (int p : members)
    node_of[p].assign(patterns[p].size() + 1, -1);

  for (std::size_t depth = 1; depth <= max_depth; ++depth) {
    for (int p : members) {
      const auto& pattern = patterns[p];
      if (pattern.size() < depth)
        continue;
      const int parent = depth == 1 ? -1 : node_of[p][depth - 1];
      const PatternElement element = pattern[depth - 1];
      int found = -1;
      for (std::size_t n = 0; n < nodes_.size(); ++n)
        if (nodes_[n].parent == parent && nodes_[n].element == element && nodes_[n].depth == static_cast<int>(depth))
          found = static_cast<int>(n);
      if (found < 0) {
        nodes_.push_back(Node{element, parent, static_cast<int>(depth), -1});
        found = static_cast<int>(nodes_.size()) - 1;
      }
      node_of[p][depth] = found;
      if (pattern.size() == depth)
        nodes_[found].terminal = p;
    }
  }
}

PatternSet::PatternSet(bool monotone_only) : monotone_only_(monotone_only)
{
  for (auto& p : enumerate_patterns(2))
    if (!monotone_only || !reorders(p))
      patterns_.push_back(std::move(p));

  std::vector<int> monotone, reordered;
  for (int i = 0; i < static_cast<int>(patterns_.size()); ++i)
    (reorders(patterns_[i]) ? reordered : monotone).push_back(i);
  monotone_trie_ = PatternTrie(patterns_, monotone);
  reorder_trie_ = PatternTrie(patterns_, reordered);
}

int PatternSet::index_of(const WordPattern& pattern) const
{
  for (int i = 0; i < static_cast<int>(patterns_.size()); ++i)
    if (patterns_[i] == pattern)
      return i;
  return -1;
}

} // namespace hymath
