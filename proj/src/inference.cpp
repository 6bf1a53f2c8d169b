#include <hymath/inference.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace hymath {

namespace {

const HypothesisForest& require_forest(const PreparedInstance& p)
{
  if (p.forest.empty())
    throw EmptyHypothesisSpace("instance " + p.id + ": empty hypothesis space" +
                               (p.skip_reason.empty() ? "" : " (" + p.skip_reason + ")"));
  return p.forest;
}

const HypothesisForest& require_gold(const PreparedInstance& p)
{
  if (!p.gold_forest)
    throw UnreachableGold("instance " + p.id + ": " + (p.skip_reason.empty() ? "no gold expression" : p.skip_reason));
  return *p.gold_forest;
}

double dot(const FeatureVector& f, const ScoringView& view)
{
  double s = 0.0;
  for (const auto& [name, count] : f.entries())
    s += view.weight(view.index->lookup(name)) * count;
  return s;
}

double neural_part(const TextMathTree& node, const ScoringView& view, const std::vector<int>& word_ids)
{
  if (!view.neural)
    return 0.0;
  double s = 0.0;
  for (const TokenSpan& span : node.segments)
    for (std::size_t t = span.begin; t < span.end; ++t) {
      const auto win = view.neural->window(word_ids, t);
      s += view.neural->score(view.theta, win, node.kind.symbol);
    }
  return s;
}

} // namespace

Potentials instance_potentials(const PreparedInstance& p, const ScoringView& view, PsiTable* psi)
{
  if (view.neural) {
    PsiTable table = view.neural->forward(view.theta, p.word_ids);
    Potentials pot = compute_potentials(p.features, view, &table);
    if (psi)
      *psi = std::move(table);
    return pot;
  }
  return compute_potentials(p.features, view, nullptr);
}

double inside_log_z(const PreparedInstance& p, const ScoringView& view)
{
  const auto& forest = require_forest(p);
  const Potentials pot = instance_potentials(p, view);
  const Chart chart(forest, pot, p.patterns, p.context.quantities, Semiring::LogSum);
  if (chart.root_score() == kNegInf)
    throw EmptyHypothesisSpace("instance " + p.id + ": no hybrid tree covers the text");
  return chart.root_score();
}

double inside_log_num(const PreparedInstance& p, const ScoringView& view)
{
  const auto& forest = require_gold(p);
  const Potentials pot = instance_potentials(p, view);
  const Chart chart(forest, pot, p.patterns, p.context.quantities, Semiring::LogSum);
  if (chart.root_score() == kNegInf)
    throw UnreachableGold("instance " + p.id + ": no hybrid tree derives the gold expression");
  return chart.root_score();
}

Expectations expectations(const PreparedInstance& p, const ScoringView& view, bool clamped)
{
  const auto& forest = clamped ? require_gold(p) : require_forest(p);
  const Potentials pot = instance_potentials(p, view);
  const Chart chart(forest, pot, p.patterns, p.context.quantities, Semiring::LogSum);
  if (chart.root_score() == kNegInf) {
    if (clamped)
      throw UnreachableGold("instance " + p.id + ": no hybrid tree derives the gold expression");
    throw EmptyHypothesisSpace("instance " + p.id + ": no hybrid tree covers the text");
  }
  Potentials marginals = Potentials::zeros_like(pot);
  chart.outside(1.0, marginals);

  Expectations out;
  out.log_partition = chart.root_score();
  for (auto& row : out.pairs)
    row.assign(p.length(), 0.0);
  std::vector<std::pair<int, double>> raw;
  accumulate_feature_counts(p.features, marginals, raw, view.neural ? &out.pairs : nullptr);
  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, c] : raw) {
    if (!out.features.empty() && out.features.back().first == id)
      out.features.back().second += c;
    else
      out.features.emplace_back(id, c);
  }
  return out;
}

namespace {

Decoded viterbi(const PreparedInstance& p, const HypothesisForest& forest, const Potentials& pot,
                const ScoringView& view)
{
  const Chart chart(forest, pot, p.patterns, p.context.quantities, Semiring::Max);
  if (chart.root_score() == kNegInf)
    throw EmptyHypothesisSpace("instance " + p.id + ": no hybrid tree covers the text");
  TextMathTree tree = chart.best_tree();
  ExprTree expr = yield_expr(tree);
  const double score = score_tree(tree, p.context, view, p.word_ids);
  return Decoded{std::move(expr), std::move(tree), score};
}

} // namespace

Decoded decode(const PreparedInstance& p, const ScoringView& view)
{
  const auto& forest = require_forest(p);
  return viterbi(p, forest, instance_potentials(p, view), view);
}

Decoded decode_clamped(const PreparedInstance& p, const ScoringView& view, const std::optional<ExprTree>& expr)
{
  const Potentials pot = instance_potentials(p, view);
  if (!expr)
    return viterbi(p, require_gold(p), pot, view);
  const HypothesisForest forest = gold_forest(*expr, p.context.quantities, p.task);
  return viterbi(p, forest, pot, view);
}

std::vector<std::pair<ExprTree, double>> k_best(const PreparedInstance& p, const ScoringView& view, std::size_t k,
                                                std::size_t candidate_cap)
{
  if (k == 0)
    throw std::invalid_argument("k must be at least 1");
  const auto& forest = require_forest(p);
  const Potentials pot = instance_potentials(p, view);

  std::map<std::string, ExprTree> candidates;
  for (auto& y : forest.derivations(candidate_cap)) {
    std::string key = serialize(y);
    candidates.try_emplace(std::move(key), std::move(y));
  }

  std::vector<std::pair<std::string, std::pair<ExprTree, double>>> scored;
  for (auto& [key, y] : candidates) {
    const HypothesisForest single = gold_forest(y, p.context.quantities, p.task);
    const Chart chart(single, pot, p.patterns, p.context.quantities, Semiring::Max);
    if (chart.root_score() == kNegInf)
      continue;
    const double score = score_tree(chart.best_tree(), p.context, view, p.word_ids);
    scored.push_back({key, {y, score}});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second.second != b.second.second)
      return a.second.second > b.second.second;
    return a.first < b.first;
  });
  std::vector<std::pair<ExprTree, double>> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i)
    out.push_back(std::move(scored[i].second));
  return out;
}

double score_tree(const TextMathTree& tree, const SentenceContext& context, const ScoringView& view,
                  const std::vector<int>& word_ids)
{
  double s = dot(extract_features(tree, context), view);
  if (view.neural)
    s += neural_tree_score(*view.neural, view.theta, tree, word_ids);
  return s;
}

std::vector<double> node_contributions(const TextMathTree& tree, const SentenceContext& context,
                                       const ScoringView& view, const std::vector<int>& word_ids)
{
  std::vector<double> out;
  auto walk = [&](auto&& self, const TextMathTree& node) -> void {
    FeatureVector f = extract_node_features(node, context);
    for (const auto& c : node.children)
      f.add("T|" + std::string(symbol_name(node.kind.symbol)) + "|" + std::string(symbol_name(c.kind.symbol)));
    out.push_back(dot(f, view) + neural_part(node, view, word_ids));
    for (const auto& c : node.children)
      self(self, c);
  };
  walk(walk, tree);
  return out;
}

} // namespace hymath
