#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <hymath/chart.hpp>
#include <hymath/model.hpp>
#include <hymath/prepare.hpp>

namespace hymath {

/// Chart potentials for one prepared instance, running the neural scorer when
/// the view has one (its psi table is returned through `psi`).
Potentials instance_potentials(const PreparedInstance& instance, const ScoringView& view, PsiTable* psi = nullptr);

/// log of the sum over every (y', t') in the hypothesis space of exp(score).
/// Throws EmptyHypothesisSpace when the space is empty.
double inside_log_z(const PreparedInstance& instance, const ScoringView& view);

/// The same sum restricted to trees whose expression is the gold. Throws
/// UnreachableGold when no hybrid tree derives it.
double inside_log_num(const PreparedInstance& instance, const ScoringView& view);

struct Expectations
{
  double log_partition = 0.0;
  std::vector<std::pair<int, double>> features;  // sorted by feature id, merged
  PsiTable pairs;                                 // expected (symbol, position) counts
};

/// Expected feature and pair counts under P(t | x, y) (clamped) or P(y, t | x).
Expectations expectations(const PreparedInstance& instance, const ScoringView& view, bool clamped);

struct Decoded
{
  ExprTree expr;
  TextMathTree tree;
  double score;
};

/// Highest-scoring (y, t). The reported score is score_tree of the returned tree.
Decoded decode(const PreparedInstance& instance, const ScoringView& view);

/// Best hybrid tree for a fixed expression (the gold when `expr` is absent).
Decoded decode_clamped(const PreparedInstance& instance, const ScoringView& view,
                       const std::optional<ExprTree>& expr = std::nullopt);

/// Top-k distinct expressions by their best tree score, descending; equal
/// scores are ordered by serialization. Candidates come from enumerating the
/// forest, limited to `candidate_cap` trees.
std::vector<std::pair<ExprTree, double>> k_best(const PreparedInstance& instance, const ScoringView& view,
                                                std::size_t k, std::size_t candidate_cap = 20000);

/// Lambda . Phi(t) + G(t) evaluated directly from the tree, summing in feature
/// name order. Independent of the chart.
double score_tree(const TextMathTree& tree, const SentenceContext& context, const ScoringView& view,
                  const std::vector<int>& word_ids);

/// Per-node share of score_tree in preorder: node features, neural pairs of the
/// node's own words, and tree features of the edges to its children.
std::vector<double> node_contributions(const TextMathTree& tree, const SentenceContext& context,
                                       const ScoringView& view, const std::vector<int>& word_ids);

} // namespace hymath
