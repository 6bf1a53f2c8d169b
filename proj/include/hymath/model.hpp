#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <hymath/features.hpp>
#include <hymath/forest.hpp>
#include <hymath/neural.hpp>

namespace hymath {

/// Read-only parameters used by scoring. Spans let the optimizer evaluate
/// trial points without copying the feature index.
struct ScoringView
{
  const FeatureIndex* index = nullptr;
  std::span<const double> lambda;
  const NeuralScorer* neural = nullptr;  // null: discrete features only
  std::span<const double> theta;

  double weight(int feature) const { return feature < 0 ? 0.0 : lambda[static_cast<std::size_t>(feature)]; }
};

struct Model
{
  TaskConfig task;
  FeatureOptions features;
  bool gold_numbers = false;  // decode with annotated quantities when the input has them
  Lexicon lexicon;
  FeatureIndex index;
  std::vector<double> weights;
  std::optional<NeuralScorer> neural;
  std::vector<double> theta;

  ScoringView view() const;

  /// Text format with hex floats, so a save/load round trip is bit-exact.
  std::string to_text() const;
  static Model from_text(const std::string& text);

  /// Writes to a temporary file and renames it over `path`.
  void save(const std::string& path) const;
  static Model load(const std::string& path);
};

class ModelFormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

nlohmann::json task_to_json(const TaskConfig& task);
TaskConfig task_from_json(const nlohmann::json& j);

} // namespace hymath
