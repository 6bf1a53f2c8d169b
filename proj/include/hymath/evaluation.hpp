#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <hymath/corpus.hpp>
#include <hymath/model.hpp>

namespace hymath {

struct Prediction
{
  std::string id;
  std::optional<std::string> expr;
  std::optional<Rational> answer;
  double score = 0.0;
  std::optional<std::string> tree;                      // hybrid-tree dump (inspect)
  std::vector<double> contributions;                    // per-node scores (inspect)
  std::vector<std::pair<std::string, double>> k_best;  // when more than one requested
  std::string error;                                    // why nothing was predicted
};

nlohmann::json prediction_to_json(const Prediction& p);
Prediction prediction_from_json(const nlohmann::json& j);
std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<Prediction>& predictions);

struct PredictOptions
{
  int threads = 1;
  std::size_t k = 1;
  bool inspect = false;
};

/// Decodes every instance against a shared read-only model.
std::vector<Prediction> predict(const Model& model, const std::vector<Instance>& inputs,
                                const PredictOptions& options = {});

enum class EvalMode { Answer, Equation };

std::string to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& text);

/// |p - g| <= 1e-4 max(1, |g|); exact equality when g is an integer.
bool answers_match(const Rational& predicted, const Rational& gold);

/// Numeric value of an expression, reading "X1 = e" and "e = X1" as e.
std::optional<Rational> expression_answer(const ExprTree& tree);

struct Verdict
{
  std::string id;
  bool correct = false;
  bool evaluable = true;  // false when the prediction is missing or cannot be evaluated
  std::string note;
};

struct EvalReport
{
  EvalMode mode = EvalMode::Answer;
  std::vector<Verdict> verdicts;
  std::size_t correct = 0;
  std::size_t unevaluable = 0;
  std::size_t skipped = 0;  // training instances left out as unreachable
  struct Fold
  {
    std::size_t test_size = 0;
    std::size_t correct = 0;
    std::size_t skipped = 0;
  };
  std::vector<Fold> folds;

  double accuracy() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Aligns predictions with golds by id; gold order defines verdict order.
EvalReport evaluate(const std::vector<Prediction>& predictions, const std::vector<Instance>& golds, EvalMode mode);

/// Instances whose annotated answer disagrees with the value of their own
/// gold expression.
std::vector<std::string> suspected_annotation_errors(const std::vector<Instance>& golds);

} // namespace hymath
