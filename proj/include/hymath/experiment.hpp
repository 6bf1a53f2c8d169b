#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <hymath/evaluation.hpp>
#include <hymath/trainer.hpp>

namespace hymath {

class ExperimentError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Fold of each instance, balanced to within one and fixed by the seed.
std::vector<int> fold_assignment(std::size_t count, int folds, std::uint64_t seed);

/// Trains on k-1 folds and decodes the held-out one, for every fold. Verdicts
/// come back in corpus order; the per-fold tallies are in `folds`.
EvalReport cross_validate(const std::vector<Instance>& corpus, int folds, const ModelSpec& spec,
                          const TrainConfig& config, EvalMode mode, std::uint64_t seed);

/// Trains on a seeded `train_fraction` of the corpus and decodes the rest.
EvalReport holdout_evaluate(const std::vector<Instance>& corpus, double train_fraction, const ModelSpec& spec,
                            const TrainConfig& config, EvalMode mode, std::uint64_t seed);

struct Variant
{
  std::string name;
  ModelSpec spec;
  TrainConfig train;
};

/// Either `folds` >= 2 (cross-validation) or a single holdout split.
struct Grid
{
  int folds = 0;
  double train_fraction = 0.8;
  EvalMode mode = EvalMode::Answer;
  std::uint64_t seed = 0;
  std::vector<Variant> variants;
};

/// Reads a grid file. Every variant starts from the base settings and applies
/// its own keys: no_pos, no_lex, no_id, gold_numbers, neural, window (implies
/// neural), inverse_ops, monotone_patterns, var_position, l2, iters,
/// optimizer.
Grid grid_from_json(const nlohmann::json& j, const ModelSpec& base_spec, const TrainConfig& base_train);

struct GridRow
{
  std::string name;
  EvalReport report;
  double seconds = 0.0;
};

std::vector<GridRow> run_ablation_grid(const std::vector<Instance>& corpus, const Grid& grid);

/// Fixed-width comparison table, one line per variant.
std::string grid_table(const std::vector<GridRow>& rows);
nlohmann::json grid_to_json(const std::vector<GridRow>& rows);

} // namespace hymath
