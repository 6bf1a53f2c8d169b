#include <hymath/experiment.hpp>

#include <algorithm>
#include <chrono>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace hymath {

using nlohmann::json;

namespace {

std::vector<std::size_t> seeded_order(std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(derive_seed(seed, 3));
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i)
    order[i] = i;
  for (std::size_t i = count; i > 1; --i)
    std::swap(order[i - 1], order[rng() % i]);
  return order;
}

struct FoldResult
{
  std::vector<Verdict> verdicts;  // test order
  std::size_t correct = 0;
  std::size_t unevaluable = 0;
  std::size_t skipped = 0;
};

FoldResult run_fold(const std::vector<Instance>& train_set, const std::vector<Instance>& test_set,
                    const ModelSpec& spec, const TrainConfig& config, EvalMode mode)
{
  TrainReport rep;
  const Model model = train(train_set, spec, config, &rep);
  PredictOptions opts;
  opts.threads = config.threads;
  const EvalReport r = evaluate(predict(model, test_set, opts), test_set, mode);
  return {r.verdicts, r.correct, r.unevaluable, rep.skipped.size()};
}

} // namespace

std::vector<int> fold_assignment(std::size_t count, int folds, std::uint64_t seed)
{
  if (folds < 2)
    throw ExperimentError("need at least 2 folds");
  if (static_cast<std::size_t>(folds) > count)
    throw ExperimentError(fmt::format("{} folds for {} instances", folds, count));
  const auto order = seeded_order(count, seed);
  std::vector<int> fold(count);
  for (std::size_t r = 0; r < count; ++r)
    fold[order[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
  return fold;
}

EvalReport cross_validate(const std::vector<Instance>& corpus, int folds, const ModelSpec& spec,
                          const TrainConfig& config, EvalMode mode, std::uint64_t seed)
{
  const auto fold = fold_assignment(corpus.size(), folds, seed);
  EvalReport report;
  report.mode = mode;
  std::vector<Verdict> verdicts(corpus.size());
  for (int f = 0; f < folds; ++f) {
    std::vector<Instance> train_set, test_set;
    std::vector<std::size_t> test_index;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (fold[i] == f) {
        test_set.push_back(corpus[i]);
        test_index.push_back(i);
      } else {
        train_set.push_back(corpus[i]);
      }
    }
    spdlog::info("fold {}/{}: {} train, {} test", f + 1, folds, train_set.size(), test_set.size());
    FoldResult r = run_fold(train_set, test_set, spec, config, mode);
    for (std::size_t k = 0; k < test_index.size(); ++k)
      verdicts[test_index[k]] = std::move(r.verdicts[k]);
    report.correct += r.correct;
    report.unevaluable += r.unevaluable;
    report.skipped += r.skipped;
    report.folds.push_back({test_set.size(), r.correct, r.skipped});
  }
  report.verdicts = std::move(verdicts);
  return report;
}

EvalReport holdout_evaluate(const std::vector<Instance>& corpus, double train_fraction, const ModelSpec& spec,
                            const TrainConfig& config, EvalMode mode, std::uint64_t seed)
{
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ExperimentError("train fraction must be in (0, 1)");
  const auto order = seeded_order(corpus.size(), seed);
  const auto cut = static_cast<std::size_t>(train_fraction * static_cast<double>(corpus.size()));
  if (cut == 0 || cut == corpus.size())
    throw ExperimentError("split leaves an empty side");
  std::vector<Instance> train_set, test_set;
  for (std::size_t r = 0; r < order.size(); ++r)
    (r < cut ? train_set : test_set).push_back(corpus[order[r]]);
  FoldResult r = run_fold(train_set, test_set, spec, config, mode);
  EvalReport report;
  report.mode = mode;
  report.verdicts = std::move(r.verdicts);
  report.correct = r.correct;
  report.unevaluable = r.unevaluable;
  report.skipped = r.skipped;
  return report;
}

Grid grid_from_json(const json& j, const ModelSpec& base_spec, const TrainConfig& base_train)
{
  if (!j.is_object())
    throw ExperimentError("grid must be a JSON object");
  static const std::vector<std::string> grid_keys{"folds", "split", "mode", "seed", "variants"};
  static const std::vector<std::string> variant_keys{"name",         "no_pos", "no_lex", "no_id",
                                                     "gold_numbers", "neural", "window", "inverse_ops",
                                                     "var_position", "l2",     "iters",  "optimizer", "monotone_patterns"};
  auto check_keys = [](const json& o, const std::vector<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : o.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ExperimentError(fmt::format("unknown key '{}' in {}", key, where));
  };
  check_keys(j, grid_keys, "grid");

  Grid grid;
  grid.seed = base_train.seed;
  try {
    grid.folds = j.value("folds", 0);
    grid.train_fraction = j.value("split", 0.8);
    grid.mode = eval_mode_from_string(j.value("mode", std::string("answer")));
    grid.seed = j.value("seed", grid.seed);
  } catch (const json::exception& e) {
    throw ExperimentError(std::string("bad grid field: ") + e.what());
  }
  if (grid.folds == 1 || grid.folds < 0)
    throw ExperimentError("folds must be 0 (holdout) or at least 2");
  if (!j.contains("variants") || !j.at("variants").is_array() || j.at("variants").empty())
    throw ExperimentError("grid needs a non-empty 'variants' array");

  for (const auto& v : j.at("variants")) {
    if (!v.is_object() || !v.contains("name"))
      throw ExperimentError("every variant needs a name");
    const std::string name = v.at("name").get<std::string>();
    check_keys(v, variant_keys, "variant " + name);
    Variant out{name, base_spec, base_train};
    try {
      if (v.value("no_pos", false))
        out.spec.features.use_pos = false;
      if (v.value("no_lex", false))
        out.spec.features.use_lexicon = false;
      if (v.value("no_id", false))
        out.spec.features.use_relevance = false;
      out.spec.gold_numbers = v.value("gold_numbers", out.spec.gold_numbers);
      out.train.neural = v.value("neural", out.train.neural);
      if (v.contains("window")) {
        out.train.neural = true;
        out.train.neural_config.window = v.at("window").get<int>();
      }
      out.spec.task.inverse_ops = v.value("inverse_ops", out.spec.task.inverse_ops);
      out.spec.task.monotone_patterns_only = v.value("monotone_patterns", out.spec.task.monotone_patterns_only);
      if (v.contains("var_position"))
        out.spec.task.var_position = var_position_from_string(v.at("var_position").get<std::string>());
      out.train.l2 = v.value("l2", out.train.l2);
      out.train.max_iterations = v.value("iters", out.train.max_iterations);
      if (v.contains("optimizer"))
        out.train.optimizer = optimizer_from_string(v.at("optimizer").get<std::string>());
      out.spec.task.validate();
      out.train.validate();
    } catch (const json::exception& e) {
      throw ExperimentError(fmt::format("variant {}: {}", name, e.what()));
    } catch (const std::invalid_argument& e) {
      throw ExperimentError(fmt::format("variant {}: {}", name, e.what()));
    }
    grid.variants.push_back(std::move(out));
  }
  return grid;
}

std::vector<GridRow> run_ablation_grid(const std::vector<Instance>& corpus, const Grid& grid)
{
  std::vector<GridRow> rows;
  for (const auto& v : grid.variants) {
    spdlog::info("variant {}", v.name);
    const auto start = std::chrono::steady_clock::now();
    EvalReport report = grid.folds >= 2
                          ? cross_validate(corpus, grid.folds, v.spec, v.train, grid.mode, grid.seed)
                          : holdout_evaluate(corpus, grid.train_fraction, v.spec, v.train, grid.mode, grid.seed);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("variant {}: {:.2f}%", v.name, 100.0 * report.accuracy());
    rows.push_back({v.name, std::move(report), seconds});
  }
  return rows;
}

std::string grid_table(const std::vector<GridRow>& rows)
{
  std::size_t width = 7;
  for (const auto& r : rows)
    width = std::max(width, r.name.size());
  std::string out = fmt::format("{:<{}}  {:>8}  {:>9}  {:>7}  {:>8}\n", "variant", width, "accuracy", "correct",
                                "skipped", "seconds");
  for (const auto& r : rows)
    out += fmt::format("{:<{}}  {:>7.2f}%  {:>9}  {:>7}  {:>8.1f}\n", r.name, width, 100.0 * r.report.accuracy(),
                       fmt::format("{}/{}", r.report.correct, r.report.verdicts.size()), r.report.skipped,
                       r.seconds);
  return out;
}

json grid_to_json(const std::vector<GridRow>& rows)
{
  json out = json::array();
  for (const auto& r : rows) {
    json j = r.report.to_json();
    j.erase("verdicts");
    j["name"] = r.name;
    j["seconds"] = r.seconds;
    out.push_back(std::move(j));
  }
  return out;
}

} // namespace hymath
