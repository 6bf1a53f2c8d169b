#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <hymath/expr.hpp>
#include <hymath/forest.hpp>
#include <hymath/hybrid_tree.hpp>
#include <hymath/pattern.hpp>
#include <hymath/tokens.hpp>

namespace hymath {

/// Template switches for the ablations: -pos, -lex, -id.
struct FeatureOptions
{
  bool use_pos = true;
  bool use_lexicon = true;
  bool use_relevance = true;

  bool operator==(const FeatureOptions&) const = default;
};

struct LexiconEntry
{
  Tokens phrase;  // lowercased words
  Symbol op;
};

struct LexiconMatch
{
  std::size_t begin;
  std::size_t end;
  Symbol op;
};

/// Phrase-to-operator table, one `phrase<TAB>operator` entry per line.
class Lexicon
{
public:
  Lexicon() = default;
  explicit Lexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {}

  static Lexicon parse(std::istream& in);
  static Lexicon load(const std::string& path);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Every occurrence of every entry in the (normalized) word sequence.
  std::vector<LexiconMatch> find_all(const Tokens& words) const;

private:
  std::vector<LexiconEntry> entries_;
};

/// Lowercased words with every quantity token replaced by "<num>".
Tokens normalize_words(const Tokens& tokens, const std::vector<Quantity>& quantities);

/// Everything feature extraction reads about one input.
struct SentenceContext
{
  Tokens tokens;
  Tokens words;
  std::optional<Tokens> pos;
  std::vector<Quantity> quantities;
  const Lexicon* lexicon = nullptr;
  FeatureOptions options;

  static SentenceContext make(Tokens tokens, std::optional<Tokens> pos, std::vector<Quantity> quantities,
                              const Lexicon* lexicon, FeatureOptions options);
};

/// Sparse feature counts keyed by feature string.
class FeatureVector
{
public:
  void add(const std::string& feature, int count = 1);
  void add(const FeatureVector& other);
  int count(const std::string& feature) const;
  const std::map<std::string, int>& entries() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  bool operator==(const FeatureVector&) const = default;

private:
  std::map<std::string, int> counts_;
};

/// Features of one node <x, y, p> (its own words only, not its children's):
/// word unigrams and bigrams per w segment, unigrams conjoined with the operand
/// orientation, the pattern, POS tags, lexicon hits, and constant relevance.
FeatureVector extract_node_features(const TextMathTree& node, const SentenceContext& context);

/// One feature per directed parent-child symbol pair.
FeatureVector extract_tree_features(const ExprTree& tree);

/// Phi(x, y, t): the node features of every node plus the tree features of y.
FeatureVector extract_features(const TextMathTree& tree, const SentenceContext& context);

/// Deterministic string interning.
class FeatureIndex
{
public:
  int lookup(const std::string& name) const;
  int intern(const std::string& name);
  const std::string& name(int id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

// Segment labels: the owner of a w segment. Leaves use CON / VAR; operators
// split by operand orientation so word features can conjoin with it.
inline constexpr int kLabelCount = 2 + 2 * kOperatorCount;
int segment_label(Symbol symbol, bool reordered);
Symbol label_symbol(int label);
bool label_reordered(int label);

/// The chart's view of the features of one input, as interned ids. Every
/// feature of a w segment decomposes into per-position, per-adjacent-pair, and
/// per-lexicon-match parts, so span scores come from prefix sums.
struct InstanceFeatures
{
  struct Match
  {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::array<int, kLabelCount> ids{};
  };

  std::size_t length = 0;
  std::array<bool, kLabelCount> active{};
  std::array<std::vector<std::vector<int>>, kLabelCount> token_ids;
  std::array<std::vector<int>, kLabelCount> bigram_ids;  // [t]: pair (t-1, t)
  std::vector<Match> lexicon;
  std::array<std::vector<int>, kOperatorCount> pattern_ids;  // [op][pattern in PatternSet]
  std::array<std::array<int, kSymbolCount>, kOperatorCount> tree_ids{};
  std::vector<std::vector<int>> quantity_leaf_ids;
  std::array<std::vector<int>, 3> var_leaf_ids;  // by variable index

  /// Looks up every feature the chart may need for the symbols the task can
  /// produce; features missing from the index get id -1 and weigh nothing.
  static InstanceFeatures build(const SentenceContext& context, const TaskConfig& task, const PatternSet& patterns,
                                const FeatureIndex& index);

  /// As build, interning features the index has not seen.
  static InstanceFeatures build_growing(const SentenceContext& context, const TaskConfig& task,
                                        const PatternSet& patterns, FeatureIndex& index);

private:
  template <class IdFn>
  static InstanceFeatures build_with(const SentenceContext& context, const TaskConfig& task,
                                     const PatternSet& patterns, IdFn id);
};

/// Operators a task can place in a tree, Equ included when it can be the root.
std::vector<Symbol> task_operators(const TaskConfig& task);

} // namespace hymath
