#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <hymath/expr.hpp>
#include <hymath/hybrid_tree.hpp>
#include <hymath/tokens.hpp>

namespace hymath {

enum class Activation { Tanh, Relu };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& text);

struct NeuralConfig
{
  int embedding_dim = 50;
  int hidden_dim = 100;
  int window = 0;  // L: the window is 2L+1 words centred on the position
  Activation activation = Activation::Tanh;
};

/// psi[symbol][position]; zero rows for symbols the scorer has no output for.
using PsiTable = std::array<std::vector<double>, kSymbolCount>;

/// Feed-forward scorer of (word window, symbol) pairs. Holds the architecture
/// and vocabularies; parameters are passed in as a flat vector laid out as
/// embeddings [V x d], hidden weights [h x (2L+1)d], hidden bias [h], output
/// rows [S x h].
class NeuralScorer
{
public:
  static constexpr const char* kPad = "<pad>";
  static constexpr const char* kUnknown = "<unk>";

  NeuralScorer() = default;
  /// `words` must not contain the padding and unknown entries; they are added.
  NeuralScorer(NeuralConfig config, std::vector<std::string> words, std::vector<Symbol> outputs);

  const NeuralConfig& config() const { return config_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<Symbol>& outputs() const { return outputs_; }
  std::size_t parameter_count() const;

  /// Uniform initialisation in [-range, range].
  std::vector<double> initial_parameters(std::uint64_t seed, double range = 0.01) const;

  int word_id(const std::string& word) const;
  std::vector<int> word_ids(const Tokens& words) const;

  /// Word ids of the window around `position`, padded at the sentence edges.
  std::vector<int> window(const std::vector<int>& sentence, std::size_t position) const;

  /// neural_score(window, symbol) for one pair.
  double score(std::span<const double> theta, std::span<const int> window, Symbol symbol) const;

  /// psi for every position and output symbol of a sentence.
  PsiTable forward(std::span<const double> theta, const std::vector<int>& sentence) const;

  /// Adds d(sum_s,t upstream[s][t] * psi[s][t]) / d theta to `grad`.
  void backward(std::span<const double> theta, const std::vector<int>& sentence, const PsiTable& upstream,
                std::span<double> grad) const;

private:
  struct Layout
  {
    std::size_t embeddings, hidden_weights, hidden_bias, output, total;
  };
  Layout layout() const;
  int output_row(Symbol symbol) const { return output_rows_[static_cast<int>(symbol)]; }
  void hidden(std::span<const double> theta, std::span<const int> window, std::vector<double>& pre,
              std::vector<double>& act) const;

  NeuralConfig config_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> word_ids_;
  std::vector<Symbol> outputs_;
  std::array<int, kSymbolCount> output_rows_{};
};

/// g_theta(x, y, t): the neural score of every (window, owner symbol) pair,
/// where a position's owner is the node whose w segment (or leaf span) covers it.
double neural_tree_score(const NeuralScorer& scorer, std::span<const double> theta, const TextMathTree& tree,
                         const std::vector<int>& sentence);

} // namespace hymath
