#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <hymath/corpus.hpp>
#include <hymath/model.hpp>
#include <hymath/prepare.hpp>

namespace hymath {

enum class OptimizerKind { Lbfgs, Sgd, Adagrad };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& text);

struct TrainConfig
{
  std::optional<OptimizerKind> optimizer;  // default: L-BFGS without neural features, AdaGrad with
  double l2 = 0.01;
  int max_iterations = 100;  // L-BFGS iterations or stochastic epochs
  double tolerance = 1e-7;
  double learning_rate = 0.1;
  int batch_size = 8;
  bool neural = false;
  NeuralConfig neural_config;
  std::uint64_t seed = 0;
  int threads = 1;

  OptimizerKind effective_optimizer() const;
  void validate() const;
};

/// What the model computes, as opposed to how it is fitted.
struct ModelSpec
{
  TaskConfig task;
  FeatureOptions features;
  bool gold_numbers = false;
  Lexicon lexicon;
};

struct TrainReport
{
  std::vector<double> objectives;  // per L-BFGS iteration or per epoch
  std::size_t used = 0;
  std::vector<std::pair<std::string, std::string>> skipped;  // id, reason
  int iterations = 0;
  std::string stop_reason;
};

class TrainingError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Regularized conditional log-likelihood of the gold expressions with the
/// latent trees summed out, over a fixed set of prepared instances. The
/// parameter vector is the feature weights followed by the neural parameters.
class TrainingObjective
{
public:
  TrainingObjective(const std::vector<PreparedInstance>& data, const FeatureIndex& index,
                    const NeuralScorer* neural, double l2, int threads);

  std::size_t dimension() const;

  /// Sum of per-instance log-likelihoods over `subset` (all when null) minus
  /// reg_scale * l2 * |x|^2; fills the gradient when `grad` is given.
  /// Per-instance work runs in parallel; the reduction is in instance order.
  double evaluate(std::span<const double> x, std::vector<double>* grad,
                  const std::vector<std::size_t>* subset = nullptr, double reg_scale = 1.0) const;

private:
  const std::vector<PreparedInstance>& data_;
  const FeatureIndex& index_;
  const NeuralScorer* neural_;
  double l2_;
  int threads_;
};

/// Seeds for independent components derived from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t component);

/// Fits a model. Instances whose gold is unreachable are skipped and listed
/// in the report. Throws TrainingError when nothing is trainable or the
/// objective stops being finite.
Model train(const std::vector<Instance>& corpus, const ModelSpec& spec, const TrainConfig& config,
            TrainReport* report = nullptr);

/// Runs `fn(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

} // namespace hymath
