#include <hymath/prepare.hpp>

#include <algorithm>

namespace hymath {

PatternSet task_patterns(const TaskConfig& task) { return PatternSet(task.inverse_ops && task.monotone_patterns_only); }

std::vector<Quantity> instance_quantities(const Instance& instance, bool gold_numbers)
{
  if (gold_numbers && instance.quantities) {
    std::vector<Quantity> out;
    for (const auto& g : *instance.quantities)
      out.push_back(Quantity{g.index, g.value, g.relevant, instance.text.at(g.index)});
    std::sort(out.begin(), out.end(), [](const Quantity& a, const Quantity& b) { return a.token < b.token; });
    return out;
  }
  auto out = detect_quantities(instance.text);
  if (instance.quantities)
    for (auto& q : out)
      for (const auto& g : *instance.quantities)
        if (g.index == q.token)
          q.relevant = g.relevant;
  return out;
}

namespace {

PreparedInstance prepare_common(const Instance& instance, const PrepareSettings& settings, bool with_gold)
{
  PreparedInstance p;
  p.id = instance.id;
  p.task = settings.task;
  p.patterns = task_patterns(settings.task);
  p.context = SentenceContext::make(instance.text, instance.pos, instance_quantities(instance, settings.gold_numbers),
                                    settings.lexicon, settings.features);
  const auto& quantities = p.context.quantities;
  try {
    p.forest = build_forest(quantities, settings.task);
  } catch (const EmptyHypothesisSpace& e) {
    p.skip_reason = e.what();
  }

  if (with_gold && instance.expr && !p.forest.empty()) {
    try {
      p.gold = adapt_gold(instance.gold(), quantities, settings.task);
      p.gold_forest = gold_forest(*p.gold, quantities, settings.task);
    } catch (const UnreachableGold& e) {
      p.skip_reason = e.what();
      p.gold_forest.reset();
    } catch (const ExprError& e) {
      p.skip_reason = e.what();
      p.gold_forest.reset();
    }
  }

  if (settings.neural)
    p.word_ids = settings.neural->word_ids(p.context.words);
  return p;
}

} // namespace

PreparedInstance prepare_instance(const Instance& instance, const PrepareSettings& settings, const FeatureIndex& index,
                                  bool with_gold)
{
  PreparedInstance p = prepare_common(instance, settings, with_gold);
  p.features = InstanceFeatures::build(p.context, p.task, p.patterns, index);
  return p;
}

PreparedInstance prepare_instance_growing(const Instance& instance, const PrepareSettings& settings,
                                          FeatureIndex& index, bool with_gold)
{
  PreparedInstance p = prepare_common(instance, settings, with_gold);
  p.features = InstanceFeatures::build_growing(p.context, p.task, p.patterns, index);
  return p;
}

} // namespace hymath
