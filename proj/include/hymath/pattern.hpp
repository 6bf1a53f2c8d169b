#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hymath {

// A is the placeholder for the left child's yield, B for the right child's,
// w for one contiguous run of one or more words owned by the node itself.
enum class PatternElement : std::uint8_t { W, A, B };

class WordPattern
{
public:
  WordPattern() = default;
  explicit WordPattern(std::vector<PatternElement> elements);

  /// Parses "wAwBw", "BwA", "w", ...; throws std::invalid_argument.
  static WordPattern from_name(std::string_view name);

  const std::vector<PatternElement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  PatternElement operator[](std::size_t i) const { return elements_[i]; }
  int arity() const;
  int word_slots() const;
  std::string name() const;

  bool operator==(const WordPattern&) const = default;

private:
  std::vector<PatternElement> elements_;
};

/// Arity 0: {w}. Arity 2: the 16 patterns [w]A[w]B[w] and [w]B[w]A[w], monotone
/// group first. Throws std::invalid_argument on any other arity.
std::vector<WordPattern> enumerate_patterns(int arity);

/// True iff B precedes A (operands appear in the text in reversed order).
bool reorders(const WordPattern& pattern);

/// Incremental left-to-right consumption of a pattern.
struct PatternState
{
  int pattern = 0;   // index into the owning pattern list
  int consumed = 0;  // number of elements already matched

  bool complete(const std::vector<WordPattern>& patterns) const;
  PatternElement next(const std::vector<WordPattern>& patterns) const;
  PatternState advanced() const { return {pattern, consumed + 1}; }
};

/// Prefix trie over a set of binary patterns sharing one orientation. Nodes are
/// stored parents-first, so a forward sweep fills every prefix before its
/// extensions and a backward sweep visits extensions first.
class PatternTrie
{
public:
  struct Node
  {
    PatternElement element;
    int parent = -1;    // -1: first element of the pattern
    int depth = 1;
    int terminal = -1;  // pattern index when this prefix is a full pattern
  };

  PatternTrie() = default;
  PatternTrie(const std::vector<WordPattern>& patterns, const std::vector<int>& members);

  const std::vector<Node>& nodes() const { return nodes_; }

private:
  std::vector<Node> nodes_;
};

/// Allowed binary patterns plus the per-orientation tries used by the chart.
class PatternSet
{
public:
  /// monotone_only keeps the 8 patterns with A before B.
  explicit PatternSet(bool monotone_only = false);

  const std::vector<WordPattern>& patterns() const { return patterns_; }
  const PatternTrie& trie(bool reordering) const { return reordering ? reorder_trie_ : monotone_trie_; }
  int index_of(const WordPattern& pattern) const;  // -1 when not allowed
  bool monotone_only() const { return monotone_only_; }

private:
  bool monotone_only_;
  std::vector<WordPattern> patterns_;
  PatternTrie monotone_trie_;
  PatternTrie reorder_trie_;
};

} // namespace hymath
