#include <hymath/chart.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hymath {

namespace {

double log_add(double a, double b)
{
  if (a == kNegInf)
    return b;
  if (b == kNegInf)
    return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

struct Accumulator
{
  Semiring semiring;
  double value = kNegInf;

  void add(double x)
  {
    if (x == kNegInf)
      return;
    value = semiring == Semiring::Max ? std::max(value, x) : log_add(value, x);
  }
};

// Largest chart (in table cells) whose trie tables are kept between passes.
constexpr std::size_t kTrieCacheCells = std::size_t{1} << 22;

// For each row i, the first and last a with t(i, a) finite (lo > hi: none).
struct RowBounds
{
  std::vector<std::size_t> lo, hi;

  explicit RowBounds(const SpanTable& t)
  {
    const std::size_t dim = t.dim();
    lo.assign(dim, dim);
    hi.assign(dim, 0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t a = i + 1; a < dim; ++a)
        if (t(i, a) != kNegInf) {
          lo[i] = std::min(lo[i], a);
          hi[i] = a;
        }
  }
};

// For each column j, the first and last a with t(a, j) finite.
struct ColumnBounds
{
  std::vector<std::size_t> lo, hi;

  explicit ColumnBounds(const SpanTable& t)
  {
    const std::size_t dim = t.dim();
    lo.assign(dim, dim);
    hi.assign(dim, 0);
    for (std::size_t j = 1; j < dim; ++j)
      for (std::size_t a = 0; a < j; ++a)
        if (t(a, j) != kNegInf) {
          lo[j] = std::min(lo[j], a);
          hi[j] = a;
        }
  }
};

} // namespace

Potentials Potentials::zeros_like(const Potentials& like)
{
  Potentials z;
  z.length = like.length;
  for (int l = 0; l < kLabelCount; ++l)
    if (like.segment[l].allocated())
      z.segment[l] = SpanTable(like.length, 0.0);
  for (int o = 0; o < kOperatorCount; ++o)
    z.pattern[o].assign(like.pattern[o].size(), 0.0);
  z.quantity_leaf.assign(like.quantity_leaf.size(), 0.0);
  return z;
}

Potentials compute_potentials(const InstanceFeatures& f, const ScoringView& view, const PsiTable* psi)
{
  Potentials p;
  const std::size_t n = f.length;
  p.length = n;

  struct LexiconWeight
  {
    std::size_t begin;
    double weight;
  };

  for (int label = 0; label < kLabelCount; ++label) {
    if (!f.active[label])
      continue;
    const int sym = static_cast<int>(label_symbol(label));
    std::vector<double> unit(n, 0.0), pair(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      for (int id : f.token_ids[label][t])
        unit[t] += view.weight(id);
      if (psi)
        unit[t] += (*psi)[sym][t];
      if (t > 0)
        pair[t] = view.weight(f.bigram_ids[label][t]);
    }
    std::vector<std::vector<LexiconWeight>> by_end(n + 1);
    for (const auto& m : f.lexicon)
      if (m.ids[label] >= 0)
        by_end[m.end].push_back({m.begin, view.weight(m.ids[label])});

    SpanTable& seg = p.segment[label];
    seg = SpanTable(n, kNegInf);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = i + 1; j <= n; ++j) {
        const std::size_t t = j - 1;
        acc += unit[t];
        if (t > i)
          acc += pair[t];
        for (const auto& m : by_end[j])
          if (m.begin >= i)
            acc += m.weight;
        seg(i, j) = acc;
      }
    }
  }

  for (int o = 0; o < kOperatorCount; ++o) {
    for (int id : f.pattern_ids[o])
      p.pattern[o].push_back(view.weight(id));
    for (int c = 0; c < kSymbolCount; ++c)
      p.tree[o][c] = view.weight(f.tree_ids[o][c]);
  }
  for (const auto& ids : f.quantity_leaf_ids) {
    double w = 0.0;
    for (int id : ids)
      w += view.weight(id);
    p.quantity_leaf.push_back(w);
  }
  for (int v = 0; v < 3; ++v)
    for (int id : f.var_leaf_ids[v])
      p.var_leaf[v] += view.weight(id);
  return p;
}

void accumulate_feature_counts(const InstanceFeatures& f, const Potentials& marginals,
                               std::vector<std::pair<int, double>>& counts, PsiTable* pair_counts)
{
  const std::size_t n = f.length;
  auto emit = [&](int id, double c) {
    if (id >= 0 && c != 0.0)
      counts.emplace_back(id, c);
  };

  // dominance[a][b] = sum of M(i, j) over i <= a, j >= b: the expected number
  // of segments covering both position a and position b - 1
  SpanTable dominance(n, 0.0);
  for (int label = 0; label < kLabelCount; ++label) {
    if (!f.active[label] || !marginals.segment[label].allocated())
      continue;
    const SpanTable& m = marginals.segment[label];
    for (std::size_t a = 0; a <= n; ++a) {
      double suffix = 0.0;
      for (std::size_t b = n + 1; b-- > 0;) {
        suffix += m(a, b);
        dominance(a, b) = suffix + (a > 0 ? dominance(a - 1, b) : 0.0);
      }
    }
    const int sym = static_cast<int>(label_symbol(label));
    for (std::size_t t = 0; t < n; ++t) {
      const double c = dominance(t, t + 1);
      for (int id : f.token_ids[label][t])
        emit(id, c);
      if (pair_counts)
        (*pair_counts)[sym][t] += c;
      if (t > 0)
        emit(f.bigram_ids[label][t], dominance(t - 1, t + 1));
    }
    for (const auto& match : f.lexicon)
      emit(match.ids[label], dominance(match.begin, match.end));
  }

  for (int o = 0; o < kOperatorCount; ++o) {
    for (std::size_t k = 0; k < f.pattern_ids[o].size() && k < marginals.pattern[o].size(); ++k)
      emit(f.pattern_ids[o][k], marginals.pattern[o][k]);
    for (int c = 0; c < kSymbolCount; ++c)
      emit(f.tree_ids[o][c], marginals.tree[o][c]);
  }
  for (std::size_t q = 0; q < f.quantity_leaf_ids.size() && q < marginals.quantity_leaf.size(); ++q)
    for (int id : f.quantity_leaf_ids[q])
      emit(id, marginals.quantity_leaf[q]);
  for (int v = 0; v < 3; ++v)
    for (int id : f.var_leaf_ids[v])
      emit(id, marginals.var_leaf[v]);
}

Chart::Chart(const HypothesisForest& forest, const Potentials& potentials, const PatternSet& patterns,
             const std::vector<Quantity>& quantities, Semiring semiring)
  : forest_(forest), pot_(potentials), patterns_(patterns), semiring_(semiring), n_(potentials.length)
{
  quantity_prefix_.assign(n_ + 1, 0);
  std::vector<int> is_quantity(n_, 0);
  for (const auto& q : quantities) {
    if (q.token >= n_)
      throw std::invalid_argument("quantity token outside the input");
    is_quantity[q.token] = 1;
    quantity_token_.push_back(q.token);
  }
  for (std::size_t t = 0; t < n_; ++t)
    quantity_prefix_[t + 1] = quantity_prefix_[t] + static_cast<std::size_t>(is_quantity[t]);

  inside_.resize(forest_.nodes().size());
  if (semiring_ == Semiring::LogSum) {
    const std::size_t trie_nodes = patterns_.trie(false).nodes().size() + patterns_.trie(true).nodes().size();
    std::size_t cells = 0;
    for (const auto& g : forest_.groups())
      cells += g.nodes.size() * g.splits.size() * trie_nodes * (n_ + 1) * (n_ + 1);
    if (cells <= kTrieCacheCells)
      trie_cache_.resize(forest_.nodes().size());
  }
  child_sum_.resize(forest_.groups().size() * kOperatorCount);

  // child sums each binary node reads
  std::vector<char> needed(child_sum_.size(), 0);
  for (const auto& g : forest_.groups())
    for (int c : g.nodes) {
      const auto& node = forest_.nodes()[c];
      if (!is_operator(node.kind.symbol))
        continue;
      for (const auto& [l, r] : g.splits) {
        needed[l * kOperatorCount + static_cast<int>(node.kind.symbol)] = 1;
        needed[r * kOperatorCount + static_cast<int>(node.kind.symbol)] = 1;
      }
    }

  const auto& groups = forest_.groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int c : groups[g].nodes) {
      if (is_operator(forest_.nodes()[c].kind.symbol))
        fill_binary(c);
      else
        fill_leaf(c);
    }
    for (int o = 0; o < kOperatorCount; ++o)
      if (needed[g * kOperatorCount + o])
        fill_child_sum(static_cast<int>(g), static_cast<Symbol>(o));
  }

  Accumulator root{semiring_};
  for (int r : forest_.roots())
    root.add(inside_[r](0, n_));
  root_score_ = root.value;
}

bool Chart::leaf_allowed(const ForestNode& node, std::size_t i, std::size_t j) const
{
  const std::size_t count = quantity_prefix_[j] - quantity_prefix_[i];
  if (node.kind.symbol == Symbol::Var)
    return count == 0;
  const std::size_t token = quantity_token_.at(node.quantity);
  return count == 1 && i <= token && token < j;
}

void Chart::fill_leaf(int c)
{
  const ForestNode& node = forest_.nodes()[c];
  const int label = segment_label(node.kind.symbol, false);
  const SpanTable& seg = pot_.segment[label];
  const double extra =
    node.kind.symbol == Symbol::Con ? pot_.quantity_leaf.at(node.quantity) : pot_.var_leaf.at(node.kind.var);
  SpanTable& out = inside_[c];
  out = SpanTable(n_, kNegInf);
  if (!seg.allocated())
    return;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j <= n_; ++j)
      if (leaf_allowed(node, i, j))
        out(i, j) = seg(i, j) + extra;
}

const SpanTable& Chart::child_sum(int group, Symbol op) const
{
  return child_sum_[group * kOperatorCount + static_cast<int>(op)];
}

SpanTable& Chart::child_sum(int group, Symbol op) { return child_sum_[group * kOperatorCount + static_cast<int>(op)]; }

void Chart::fill_child_sum(int group, Symbol op)
{
  SpanTable& cs = child_sum(group, op);
  cs = SpanTable(n_, kNegInf);
  for (int c : forest_.groups()[group].nodes) {
    const double tw = pot_.tree[static_cast<int>(op)][static_cast<int>(forest_.nodes()[c].kind.symbol)];
    const SpanTable& in = inside_[c];
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j <= n_; ++j) {
        const double v = in(i, j);
        if (v == kNegInf)
          continue;
        const double x = v + tw;
        cs(i, j) = semiring_ == Semiring::Max ? std::max(cs(i, j), x) : log_add(cs(i, j), x);
      }
  }
}

const SpanTable* Chart::element_table(Symbol op, const std::pair<int, int>& split, bool reordered,
                                      PatternElement element) const
{
  switch (element) {
    case PatternElement::W: {
      const SpanTable& t = pot_.segment[segment_label(op, reordered)];
      return t.allocated() ? &t : nullptr;
    }
    case PatternElement::A:
      return &child_sum(split.first, op);
    case PatternElement::B:
      return &child_sum(split.second, op);
  }
  return nullptr;
}

std::vector<SpanTable> Chart::trie_tables(Symbol op, const std::pair<int, int>& split, bool reordered) const
{
  const auto& nodes = patterns_.trie(reordered).nodes();
  std::vector<SpanTable> tables(nodes.size());
  std::vector<char> row_live(n_ + 1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& node = nodes[k];
    SpanTable& out = tables[k];
    out = SpanTable(n_, kNegInf);
    const SpanTable* e = element_table(op, split, reordered, node.element);
    if (!e)
      continue;
    if (node.parent < 0) {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j <= n_; ++j)
          out(i, j) = (*e)(i, j);
      continue;
    }
    const SpanTable& prev = tables[node.parent];
    const RowBounds pb(prev);
    const ColumnBounds eb(*e);
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (pb.lo[i] > pb.hi[i])
        continue;
      for (std::size_t j = pb.lo[i] + 1; j <= n_; ++j) {
        const std::size_t lo = std::max(pb.lo[i], eb.lo[j]);
        const std::size_t hi = std::min({pb.hi[i], eb.hi[j], j - 1});
        if (lo > hi)
          continue;
        double best = kNegInf;
        for (std::size_t a = lo; a <= hi; ++a)
          best = std::max(best, prev(i, a) + (*e)(a, j));
        if (best == kNegInf || semiring_ == Semiring::Max) {
          out(i, j) = best;
          continue;
        }
        double sum = 0.0;
        for (std::size_t a = lo; a <= hi; ++a) {
          const double x = prev(i, a) + (*e)(a, j);
          if (x != kNegInf)
            sum += std::exp(x - best);
        }
        out(i, j) = best + std::log(sum);
      }
    }
  }
  return tables;
}

void Chart::fill_binary(int c)
{
  const ForestNode& node = forest_.nodes()[c];
  const Symbol op = node.kind.symbol;
  const auto& weights = pot_.pattern[static_cast<int>(op)];
  SpanTable& out = inside_[c];
  out = SpanTable(n_, kNegInf);
  const bool cache = !trie_cache_.empty();
  for (const auto& split : forest_.groups()[node.group].splits)
    for (bool reordered : {false, true}) {
      const auto& trie = patterns_.trie(reordered).nodes();
      if (trie.empty())
        continue;
      auto tables = trie_tables(op, split, reordered);
      for (std::size_t k = 0; k < trie.size(); ++k) {
        if (trie[k].terminal < 0)
          continue;
        const double pw = weights.at(trie[k].terminal);
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = i + 1; j <= n_; ++j) {
            const double t = tables[k](i, j);
            if (t == kNegInf)
              continue;
            const double x = t + pw;
            out(i, j) = semiring_ == Semiring::Max ? std::max(out(i, j), x) : log_add(out(i, j), x);
          }
      }
      if (cache)
        trie_cache_[c].push_back(std::move(tables));
    }
}

void Chart::outside(double scale, Potentials& marginals) const
{
  if (semiring_ != Semiring::LogSum)
    throw std::logic_error("outside pass needs the log-sum chart");
  if (root_score_ == kNegInf)
    throw std::logic_error("outside pass on an empty chart");

  std::vector<SpanTable> adj_inside(inside_.size());
  std::vector<SpanTable> adj_cs(child_sum_.size());
  for (std::size_t c = 0; c < inside_.size(); ++c)
    adj_inside[c] = SpanTable(n_, 0.0);
  for (std::size_t k = 0; k < child_sum_.size(); ++k)
    if (child_sum_[k].allocated())
      adj_cs[k] = SpanTable(n_, 0.0);

  for (int r : forest_.roots()) {
    const double v = inside_[r](0, n_);
    if (v != kNegInf)
      adj_inside[r](0, n_) += scale * std::exp(v - root_score_);
  }

  const auto& groups = forest_.groups();
  for (std::size_t g = groups.size(); g-- > 0;) {
    // child sums of this group feed its nodes
    for (int o = 0; o < kOperatorCount; ++o) {
      const std::size_t key = g * kOperatorCount + static_cast<std::size_t>(o);
      if (!child_sum_[key].allocated())
        continue;
      const SpanTable& cs = child_sum_[key];
      const SpanTable& adj = adj_cs[key];
      for (int c : groups[g].nodes) {
        const int sym = static_cast<int>(forest_.nodes()[c].kind.symbol);
        const double tw = pot_.tree[o][sym];
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = i + 1; j <= n_; ++j) {
            const double a = adj(i, j);
            const double v = inside_[c](i, j);
            if (a == 0.0 || v == kNegInf)
              continue;
            const double w = a * std::exp(v + tw - cs(i, j));
            adj_inside[c](i, j) += w;
            marginals.tree[o][sym] += w;
          }
      }
    }

    for (int c : groups[g].nodes) {
      const ForestNode& node = forest_.nodes()[c];
      const SpanTable& adj = adj_inside[c];
      if (!is_operator(node.kind.symbol)) {
        const int label = segment_label(node.kind.symbol, false);
        double total = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = i + 1; j <= n_; ++j) {
            const double a = adj(i, j);
            if (a == 0.0)
              continue;
            marginals.segment[label](i, j) += a;
            total += a;
          }
        if (node.kind.symbol == Symbol::Con)
          marginals.quantity_leaf.at(node.quantity) += total;
        else
          marginals.var_leaf.at(node.kind.var) += total;
        continue;
      }

      const Symbol op = node.kind.symbol;
      const int o = static_cast<int>(op);
      std::size_t cached = 0;
      for (const auto& split : groups[g].splits)
        for (bool reordered : {false, true}) {
          const auto& trie = patterns_.trie(reordered).nodes();
          if (trie.empty())
            continue;
          std::vector<SpanTable> recomputed;
          if (trie_cache_.empty())
            recomputed = trie_tables(op, split, reordered);
          const auto& tables = trie_cache_.empty() ? recomputed : trie_cache_[c][cached++];
          std::vector<SpanTable> adj_t(trie.size());
          for (auto& t : adj_t)
            t = SpanTable(n_, 0.0);
          for (std::size_t k = 0; k < trie.size(); ++k) {
            if (trie[k].terminal < 0)
              continue;
            const double pw = pot_.pattern[o].at(trie[k].terminal);
            for (std::size_t i = 0; i < n_; ++i)
              for (std::size_t j = i + 1; j <= n_; ++j) {
                const double a = adj(i, j);
                const double t = tables[k](i, j);
                if (a == 0.0 || t == kNegInf)
                  continue;
                const double w = a * std::exp(t + pw - inside_[c](i, j));
                adj_t[k](i, j) += w;
                marginals.pattern[o][trie[k].terminal] += w;
              }
          }
          for (std::size_t k = trie.size(); k-- > 0;) {
            const auto& tn = trie[k];
            const SpanTable* e = element_table(op, split, reordered, tn.element);
            if (!e)
              continue;
            SpanTable* adj_e = nullptr;
            if (tn.element == PatternElement::W)
              adj_e = &marginals.segment[segment_label(op, reordered)];
            else
              adj_e = &adj_cs[(tn.element == PatternElement::A ? split.first : split.second) * kOperatorCount + o];
            const SpanTable& at = adj_t[k];
            if (tn.parent < 0) {
              for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j <= n_; ++j)
                  if (at(i, j) != 0.0)
                    (*adj_e)(i, j) += at(i, j);
              continue;
            }
            const SpanTable& prev = tables[tn.parent];
            const RowBounds pb(prev);
            const ColumnBounds eb(*e);
            SpanTable& adj_prev = adj_t[tn.parent];
            for (std::size_t i = 0; i + 1 < n_; ++i)
              for (std::size_t j = i + 2; j <= n_; ++j) {
                const double a = at(i, j);
                if (a == 0.0)
                  continue;
                const double total = tables[k](i, j);
                const std::size_t lo = std::max(pb.lo[i], eb.lo[j]);
                const std::size_t hi = std::min({pb.hi[i], eb.hi[j], j - 1});
                for (std::size_t m = lo; m <= hi; ++m) {
                  const double x = prev(i, m) + (*e)(m, j);
                  if (x == kNegInf)
                    continue;
                  const double w = a * std::exp(x - total);
                  adj_prev(i, m) += w;
                  (*adj_e)(m, j) += w;
                }
              }
          }
        }
    }
  }
}

TextMathTree Chart::best_tree() const
{
  if (semiring_ != Semiring::Max)
    throw std::logic_error("traceback needs the max chart");
  if (root_score_ == kNegInf)
    throw std::logic_error("traceback on an empty chart");
  for (int r : forest_.roots())
    if (inside_[r](0, n_) == root_score_)
      return trace(r, 0, n_);
  throw std::logic_error("traceback failed at the root");
}

TextMathTree Chart::trace(int c, std::size_t i, std::size_t j) const
{
  const ForestNode& node = forest_.nodes()[c];
  if (!is_operator(node.kind.symbol))
    return TextMathTree::leaf(node.kind, TokenSpan{i, j});

  const Symbol op = node.kind.symbol;
  const int o = static_cast<int>(op);
  const double target = inside_[c](i, j);

  auto pick_child = [&](int group, std::size_t a, std::size_t b) {
    const double want = child_sum(group, op)(a, b);
    for (int child : forest_.groups()[group].nodes) {
      const double v = inside_[child](a, b);
      if (v != kNegInf && v + pot_.tree[o][static_cast<int>(forest_.nodes()[child].kind.symbol)] == want)
        return trace(child, a, b);
    }
    throw std::logic_error("traceback failed at a child sum");
  };

  for (const auto& split : forest_.groups()[node.group].splits)
    for (bool reordered : {false, true}) {
      const auto& trie = patterns_.trie(reordered).nodes();
      if (trie.empty())
        continue;
      const auto tables = trie_tables(op, split, reordered);
      for (std::size_t k = 0; k < trie.size(); ++k) {
        if (trie[k].terminal < 0 || tables[k](i, j) == kNegInf)
          continue;
        if (tables[k](i, j) + pot_.pattern[o].at(trie[k].terminal) != target)
          continue;

        // walk the trie path back to the first element
        std::vector<std::pair<PatternElement, TokenSpan>> pieces;
        int cur = static_cast<int>(k);
        std::size_t end = j;
        while (trie[cur].parent >= 0) {
          const auto& tn = trie[cur];
          const SpanTable* e = element_table(op, split, reordered, tn.element);
          const SpanTable& prev = tables[tn.parent];
          std::size_t found = 0;
          for (std::size_t m = i + 1; m < end && !found; ++m) {
            const double x = prev(i, m) + (*e)(m, end);
            if (x != kNegInf && x == tables[cur](i, end))
              found = m;
          }
          if (!found)
            throw std::logic_error("traceback failed inside a pattern");
          pieces.emplace_back(tn.element, TokenSpan{found, end});
          end = found;
          cur = tn.parent;
        }
        pieces.emplace_back(trie[cur].element, TokenSpan{i, end});
        std::reverse(pieces.begin(), pieces.end());

        std::vector<TokenSpan> segments;
        std::optional<TextMathTree> a, b;
        for (const auto& [element, span] : pieces) {
          if (element == PatternElement::W)
            segments.push_back(span);
          else if (element == PatternElement::A)
            a = pick_child(split.first, span.begin, span.end);
          else
            b = pick_child(split.second, span.begin, span.end);
        }
        return TextMathTree::binary(op, patterns_.patterns().at(trie[k].terminal), std::move(segments),
                                    std::move(*a), std::move(*b));
      }
    }
  throw std::logic_error("traceback failed at a binary node");
}

} // namespace hymath
