#include <hymath/neural.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hymath {

std::string to_string(Activation activation) { return activation == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& text)
{
  if (text == "tanh")
    return Activation::Tanh;
  if (text == "relu")
    return Activation::Relu;
  throw std::invalid_argument("unknown activation '" + text + "'");
}

NeuralScorer::NeuralScorer(NeuralConfig config, std::vector<std::string> words, std::vector<Symbol> outputs)
  : config_(config), outputs_(std::move(outputs))
{
  if (config_.embedding_dim <= 0 || config_.hidden_dim <= 0 || config_.window < 0)
    throw std::invalid_argument("neural dimensions must be positive");
  vocabulary_.push_back(kPad);
  vocabulary_.push_back(kUnknown);
  for (auto& w : words)
    if (w != kPad && w != kUnknown)
      vocabulary_.push_back(std::move(w));
  for (std::size_t i = 0; i < vocabulary_.size(); ++i)
    if (!word_ids_.emplace(vocabulary_[i], static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate vocabulary word '" + vocabulary_[i] + "'");
  output_rows_.fill(-1);
  for (std::size_t r = 0; r < outputs_.size(); ++r)
    output_rows_[static_cast<int>(outputs_[r])] = static_cast<int>(r);
}

NeuralScorer::Layout NeuralScorer::layout() const
{
  const std::size_t d = config_.embedding_dim, h = config_.hidden_dim;
  const std::size_t in = (2 * config_.window + 1) * d;
  Layout l{};
  l.embeddings = 0;
  l.hidden_weights = vocabulary_.size() * d;
  l.hidden_bias = l.hidden_weights + h * in;
  l.output = l.hidden_bias + h;
  l.total = l.output + outputs_.size() * h;
  return l;
}

std::size_t NeuralScorer::parameter_count() const { return layout().total; }

std::vector<double> NeuralScorer::initial_parameters(std::uint64_t seed, double range) const
{
  std::mt19937_64 rng(seed);
  std::vector<double> theta(parameter_count());
  for (double& v : theta) {
    // 53 random bits mapped to [0, 1) without relying on library distributions
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * range;
  }
  return theta;
}

int NeuralScorer::word_id(const std::string& word) const
{
  const auto it = word_ids_.find(word);
  return it == word_ids_.end() ? 1 : it->second;
}

std::vector<int> NeuralScorer::word_ids(const Tokens& words) const
{
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words)
    out.push_back(word_id(w));
  return out;
}

std::vector<int> NeuralScorer::window(const std::vector<int>& sentence, std::size_t position) const
{
  std::vector<int> out;
  const auto L = static_cast<std::ptrdiff_t>(config_.window);
  const auto n = static_cast<std::ptrdiff_t>(sentence.size());
  for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(position) - L; k <= static_cast<std::ptrdiff_t>(position) + L; ++k)
    out.push_back(k < 0 || k >= n ? 0 : sentence[static_cast<std::size_t>(k)]);
  return out;
}

void NeuralScorer::hidden(std::span<const double> theta, std::span<const int> window, std::vector<double>& pre,
                          std::vector<double>& act) const
{
  const Layout l = layout();
  const std::size_t d = config_.embedding_dim, h = config_.hidden_dim;
  const std::size_t in = window.size() * d;
  pre.assign(h, 0.0);
  act.assign(h, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    double z = theta[l.hidden_bias + r];
    const double* row = theta.data() + l.hidden_weights + r * in;
    for (std::size_t k = 0; k < window.size(); ++k) {
      const double* e = theta.data() + l.embeddings + static_cast<std::size_t>(window[k]) * d;
      for (std::size_t c = 0; c < d; ++c)
        z += row[k * d + c] * e[c];
    }
    pre[r] = z;
    act[r] = config_.activation == Activation::Tanh ? std::tanh(z) : (z > 0 ? z : 0.0);
  }
}

double NeuralScorer::score(std::span<const double> theta, std::span<const int> window, Symbol symbol) const
{
  if (theta.size() != parameter_count())
    throw std::invalid_argument("neural parameter vector has the wrong size");
  const int row = output_row(symbol);
  if (row < 0)
    return 0.0;
  std::vector<double> pre, act;
  hidden(theta, window, pre, act);
  const Layout l = layout();
  const std::size_t h = config_.hidden_dim;
  double s = 0.0;
  for (std::size_t r = 0; r < h; ++r)
    s += theta[l.output + static_cast<std::size_t>(row) * h + r] * act[r];
  return s;
}

PsiTable NeuralScorer::forward(std::span<const double> theta, const std::vector<int>& sentence) const
{
  const std::size_t n = sentence.size();
  PsiTable psi;
  for (auto& row : psi)
    row.assign(n, 0.0);
  const Layout l = layout();
  const std::size_t h = config_.hidden_dim;
  std::vector<double> pre, act;
  for (std::size_t t = 0; t < n; ++t) {
    const auto win = window(sentence, t);
    hidden(theta, win, pre, act);
    for (Symbol s : outputs_) {
      const int row = output_row(s);
      double v = 0.0;
      for (std::size_t r = 0; r < h; ++r)
        v += theta[l.output + static_cast<std::size_t>(row) * h + r] * act[r];
      psi[static_cast<int>(s)][t] = v;
    }
  }
  return psi;
}

void NeuralScorer::backward(std::span<const double> theta, const std::vector<int>& sentence, const PsiTable& upstream,
                            std::span<double> grad) const
{
  const Layout l = layout();
  const std::size_t d = config_.embedding_dim, h = config_.hidden_dim;
  std::vector<double> pre, act, dpre(h);
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    bool any = false;
    for (Symbol s : outputs_)
      any = any || upstream[static_cast<int>(s)][t] != 0.0;
    if (!any)
      continue;
    const auto win = window(sentence, t);
    const std::size_t in = win.size() * d;
    hidden(theta, win, pre, act);
    std::fill(dpre.begin(), dpre.end(), 0.0);
    for (Symbol s : outputs_) {
      const double g = upstream[static_cast<int>(s)][t];
      if (g == 0.0)
        continue;
      const std::size_t base = l.output + static_cast<std::size_t>(output_row(s)) * h;
      for (std::size_t r = 0; r < h; ++r) {
        grad[base + r] += g * act[r];
        dpre[r] += g * theta[base + r];
      }
    }
    for (std::size_t r = 0; r < h; ++r) {
      if (config_.activation == Activation::Tanh)
        dpre[r] *= 1.0 - act[r] * act[r];
      else
        dpre[r] = pre[r] > 0 ? dpre[r] : 0.0;
    }
    for (std::size_t r = 0; r < h; ++r) {
      if (dpre[r] == 0.0)
        continue;
      grad[l.hidden_bias + r] += dpre[r];
      const std::size_t row = l.hidden_weights + r * in;
      for (std::size_t k = 0; k < win.size(); ++k) {
        const std::size_t e = l.embeddings + static_cast<std::size_t>(win[k]) * d;
        for (std::size_t c = 0; c < d; ++c) {
          grad[row + k * d + c] += dpre[r] * theta[e + c];
          grad[e + c] += dpre[r] * theta[row + k * d + c];
        }
      }
    }
  }
}

namespace {

void collect_owners(const TextMathTree& node, std::vector<std::pair<std::size_t, Symbol>>& out)
{
  for (const TokenSpan& span : node.segments)
    for (std::size_t t = span.begin; t < span.end; ++t)
      out.emplace_back(t, node.kind.symbol);
  for (const auto& c : node.children)
    collect_owners(c, out);
}

} // namespace

double neural_tree_score(const NeuralScorer& scorer, std::span<const double> theta, const TextMathTree& tree,
                         const std::vector<int>& sentence)
{
  std::vector<std::pair<std::size_t, Symbol>> owners;
  collect_owners(tree, owners);
  std::sort(owners.begin(), owners.end());
  double total = 0.0;
  for (const auto& [t, s] : owners) {
    const auto win = scorer.window(sentence, t);
    total += scorer.score(theta, win, s);
  }
  return total;
}

} // namespace hymath
