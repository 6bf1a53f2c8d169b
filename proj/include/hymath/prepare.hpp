#pragma once

#include <optional>
#include <string>
#include <vector>

#include <hymath/corpus.hpp>
#include <hymath/features.hpp>
#include <hymath/forest.hpp>
#include <hymath/neural.hpp>
#include <hymath/pattern.hpp>

namespace hymath {

/// Patterns the chart may use under a task configuration.
PatternSet task_patterns(const TaskConfig& task);

/// Quantities of an instance: the annotated ones when `gold_numbers` is set and
/// annotations exist, otherwise the detector's output. Relevance flags are
/// copied from annotations onto detected quantities at the same token.
std::vector<Quantity> instance_quantities(const Instance& instance, bool gold_numbers);

/// Everything inference needs for one instance, computed once.
struct PreparedInstance
{
  std::string id;
  TaskConfig task;
  PatternSet patterns;
  SentenceContext context;
  HypothesisForest forest;        // empty when no candidate exists
  std::optional<ExprTree> gold;   // gold adapted to the task (wrapped / inverse ops)
  std::optional<HypothesisForest> gold_forest;
  std::string skip_reason;        // why the gold is unusable for training
  InstanceFeatures features;
  std::vector<int> word_ids;      // neural vocabulary ids

  std::size_t length() const { return context.words.size(); }
  bool trainable() const { return gold_forest.has_value() && !forest.empty(); }
};

struct PrepareSettings
{
  TaskConfig task;
  FeatureOptions features;
  bool gold_numbers = false;
  const Lexicon* lexicon = nullptr;
  const NeuralScorer* neural = nullptr;
};

/// Builds forests and feature tables against a fixed index; features the
/// index lacks are dropped.
PreparedInstance prepare_instance(const Instance& instance, const PrepareSettings& settings, const FeatureIndex& index,
                                  bool with_gold);

/// As prepare_instance, interning new features (training).
PreparedInstance prepare_instance_growing(const Instance& instance, const PrepareSettings& settings,
                                          FeatureIndex& index, bool with_gold);

} // namespace hymath
