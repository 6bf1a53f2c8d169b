#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include <hymath/features.hpp>
#include <hymath/forest.hpp>
#include <hymath/hybrid_tree.hpp>
#include <hymath/model.hpp>
#include <hymath/neural.hpp>
#include <hymath/pattern.hpp>

namespace hymath {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Square table over span endpoints 0..n, row-major.
class SpanTable
{
public:
  SpanTable() = default;
  SpanTable(std::size_t n, double fill) : dim_(n + 1), data_(dim_ * dim_, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  std::size_t dim() const { return dim_; }
  bool allocated() const { return dim_ > 0; }

private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Log-potentials of every factor the chart multiplies together. The same
/// shape holds marginals (expected factor counts) after an outside pass.
struct Potentials
{
  std::size_t length = 0;
  std::array<SpanTable, kLabelCount> segment;               // w segment owned by a label
  std::array<std::vector<double>, kOperatorCount> pattern;  // by PatternSet index
  std::array<std::array<double, kSymbolCount>, kOperatorCount> tree{};
  std::vector<double> quantity_leaf;
  std::array<double, 3> var_leaf{};

  /// Zero tables with the shape of `like`.
  static Potentials zeros_like(const Potentials& like);
};

/// Segment potentials from sparse weights and the neural psi table.
Potentials compute_potentials(const InstanceFeatures& features, const ScoringView& view, const PsiTable* psi);

/// Appends the expected feature counts implied by `marginals` to `counts` as
/// (feature id, count) entries, and adds the expected (symbol, position) pair
/// counts to `pair_counts` when given.
void accumulate_feature_counts(const InstanceFeatures& features, const Potentials& marginals,
                               std::vector<std::pair<int, double>>& counts, PsiTable* pair_counts);

enum class Semiring { LogSum, Max };

/// Inside chart over hypothesis-forest nodes and spans. Each binary node
/// combines its children through the pattern tries, one element at a time, so
/// every step joins two adjacent spans.
class Chart
{
public:
  Chart(const HypothesisForest& forest, const Potentials& potentials, const PatternSet& patterns,
        const std::vector<Quantity>& quantities, Semiring semiring);

  /// log Z (LogSum) or the best score (Max); -inf when no tree covers the text.
  double root_score() const { return root_score_; }

  /// LogSum only: adds `scale` times the marginal of every potential entry.
  void outside(double scale, Potentials& marginals) const;

  /// Max only: a highest-scoring tree, found by exact-equality traceback.
  TextMathTree best_tree() const;

private:
  struct Element
  {
    PatternElement kind;
    const SpanTable* table;
  };

  bool leaf_allowed(const ForestNode& node, std::size_t i, std::size_t j) const;
  void fill_leaf(int node);
  void fill_binary(int node);
  void fill_child_sum(int group, Symbol op);
  const SpanTable& child_sum(int group, Symbol op) const;
  SpanTable& child_sum(int group, Symbol op);
  std::vector<SpanTable> trie_tables(Symbol op, const std::pair<int, int>& split, bool reordered) const;
  const SpanTable* element_table(Symbol op, const std::pair<int, int>& split, bool reordered,
                                 PatternElement element) const;
  TextMathTree trace(int node, std::size_t i, std::size_t j) const;

  const HypothesisForest& forest_;
  const Potentials& pot_;
  const PatternSet& patterns_;
  Semiring semiring_;
  std::size_t n_;
  std::vector<std::size_t> quantity_prefix_;  // quantity tokens before position
  std::vector<std::size_t> quantity_token_;   // token of each quantity
  std::vector<SpanTable> inside_;
  std::vector<SpanTable> child_sum_;  // [group * kOperatorCount + op]
  // log-sum trie tables kept for the outside pass: [node][split * 2 + reordered]
  std::vector<std::vector<std::vector<SpanTable>>> trie_cache_;
  double root_score_ = kNegInf;
};

} // namespace hymath
