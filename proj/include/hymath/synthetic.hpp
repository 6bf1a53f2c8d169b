#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include <hymath/corpus.hpp>

namespace hymath {

/// One problem shape. `text` is space-tokenized with numeric slots {0}, {1},
/// ... and filler slots {person}, {person2}, {item}; `expr` uses the numeric
/// slots. Slots in the text but not the expression are distractors.
struct Template
{
  std::string name;
  std::string text;
  std::string expr;
  double weight = 1.0;
};

struct TemplateSet
{
  std::vector<Template> templates;

  static TemplateSet from_json(const nlohmann::json& j);
  static TemplateSet load(const std::string& path);
  nlohmann::json to_json() const;

  /// Built-in sets: "mixed" (all four operators, reordering phrasings, a
  /// distractor template), "reordering" (minus / less than), "arithmetic"
  /// (one template family per operator).
  static TemplateSet builtin(const std::string& name);
};

/// Deterministic corpus: templates drawn by weight, distinct quantities from
/// 2..99 with occasional one-decimal values, gold expression, answer, and
/// quantity annotations marking distractors irrelevant.
std::vector<Instance> generate_synthetic(const TemplateSet& templates, std::size_t count, std::uint64_t seed);

} // namespace hymath
