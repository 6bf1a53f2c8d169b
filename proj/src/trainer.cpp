#include <hymath/trainer.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include <hymath/chart.hpp>
#include <hymath/inference.hpp>
#include <hymath/optimizer.hpp>

namespace hymath {

std::string to_string(OptimizerKind kind)
{
  switch (kind) {
    case OptimizerKind::Lbfgs: return "lbfgs";
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adagrad: return "adagrad";
  }
  return "lbfgs";
}

OptimizerKind optimizer_from_string(const std::string& text)
{
  if (text == "lbfgs")
    return OptimizerKind::Lbfgs;
  if (text == "sgd")
    return OptimizerKind::Sgd;
  if (text == "adagrad")
    return OptimizerKind::Adagrad;
  throw std::invalid_argument("unknown optimizer '" + text + "'");
}

OptimizerKind TrainConfig::effective_optimizer() const
{
  if (optimizer)
    return *optimizer;
  return neural ? OptimizerKind::Adagrad : OptimizerKind::Lbfgs;
}

void TrainConfig::validate() const
{
  if (l2 < 0)
    throw std::invalid_argument("l2 must be non-negative");
  if (max_iterations < 0)
    throw std::invalid_argument("iteration count must be non-negative");
  if (neural_config.window < 0)
    throw std::invalid_argument("window must be non-negative");
  if (batch_size < 1)
    throw std::invalid_argument("batch size must be positive");
  if (threads < 1)
    throw std::invalid_argument("thread count must be positive");
  if (!(learning_rate > 0))
    throw std::invalid_argument("learning rate must be positive");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t component)
{
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (component + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn)
{
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++)
          fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  for (auto& t : pool)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

namespace {

struct InstanceGradient
{
  double log_likelihood = 0.0;
  std::vector<std::pair<int, double>> features;  // clamped minus free, merged by id
  PsiTable upstream;                              // clamped minus free pair counts
};

InstanceGradient instance_gradient(const PreparedInstance& p, const ScoringView& view, bool want_grad)
{
  const Potentials pot = instance_potentials(p, view);
  const Chart clamped(*p.gold_forest, pot, p.patterns, p.context.quantities, Semiring::LogSum);
  const Chart free(p.forest, pot, p.patterns, p.context.quantities, Semiring::LogSum);
  if (clamped.root_score() == kNegInf || free.root_score() == kNegInf)
    throw TrainingError("instance " + p.id + " has no hybrid tree for its gold expression");

  InstanceGradient out;
  out.log_likelihood = clamped.root_score() - free.root_score();
  if (!want_grad)
    return out;

  Potentials marginals = Potentials::zeros_like(pot);
  clamped.outside(1.0, marginals);
  free.outside(-1.0, marginals);
  for (auto& row : out.upstream)
    row.assign(p.length(), 0.0);
  std::vector<std::pair<int, double>> raw;
  accumulate_feature_counts(p.features, marginals, raw, view.neural ? &out.upstream : nullptr);
  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, c] : raw) {
    if (!out.features.empty() && out.features.back().first == id)
      out.features.back().second += c;
    else
      out.features.emplace_back(id, c);
  }
  return out;
}

} // namespace

TrainingObjective::TrainingObjective(const std::vector<PreparedInstance>& data, const FeatureIndex& index,
                                     const NeuralScorer* neural, double l2, int threads)
  : data_(data), index_(index), neural_(neural), l2_(l2), threads_(threads)
{
}

std::size_t TrainingObjective::dimension() const
{
  return index_.size() + (neural_ ? neural_->parameter_count() : 0);
}

double TrainingObjective::evaluate(std::span<const double> x, std::vector<double>* grad,
                                   const std::vector<std::size_t>* subset, double reg_scale) const
{
  if (x.size() != dimension())
    throw std::invalid_argument("parameter vector has the wrong dimension");
  const std::size_t lambda_size = index_.size();
  ScoringView view;
  view.index = &index_;
  view.lambda = x.subspan(0, lambda_size);
  view.neural = neural_;
  if (neural_)
    view.theta = x.subspan(lambda_size);

  std::vector<std::size_t> all;
  if (!subset) {
    all.resize(data_.size());
    for (std::size_t i = 0; i < all.size(); ++i)
      all[i] = i;
    subset = &all;
  }

  std::vector<InstanceGradient> results(subset->size());
  parallel_for(subset->size(), threads_, [&](std::size_t k) {
    results[k] = instance_gradient(data_[(*subset)[k]], view, grad != nullptr);
  });

  double total = 0.0;
  if (grad)
    grad->assign(x.size(), 0.0);
  for (std::size_t k = 0; k < results.size(); ++k) {
    total += results[k].log_likelihood;
    if (!grad)
      continue;
    for (const auto& [id, c] : results[k].features)
      (*grad)[static_cast<std::size_t>(id)] += c;
    if (neural_)
      neural_->backward(view.theta, data_[(*subset)[k]].word_ids, results[k].upstream,
                        std::span<double>(*grad).subspan(lambda_size));
  }

  double norm = 0.0;
  for (double v : x)
    norm += v * v;
  total -= reg_scale * l2_ * norm;
  if (grad)
    for (std::size_t i = 0; i < x.size(); ++i)
      (*grad)[i] -= 2.0 * reg_scale * l2_ * x[i];
  return total;
}

Model train(const std::vector<Instance>& corpus, const ModelSpec& spec, const TrainConfig& config,
            TrainReport* report)
{
  spec.task.validate();
  config.validate();
  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};

  Model model;
  model.task = spec.task;
  model.features = spec.features;
  model.gold_numbers = spec.gold_numbers;
  model.lexicon = spec.lexicon;

  PrepareSettings settings;
  settings.task = spec.task;
  settings.features = spec.features;
  settings.gold_numbers = spec.gold_numbers;
  settings.lexicon = &model.lexicon;

  // screen with an empty index: every feature weighs zero, which is enough to
  // tell whether some hybrid tree derives the gold
  std::vector<const Instance*> usable;
  {
    FeatureIndex scratch;
    std::vector<double> none;
    ScoringView zero;
    zero.index = &scratch;
    zero.lambda = none;
    for (const auto& in : corpus) {
      PreparedInstance p = prepare_instance(in, settings, scratch, true);
      std::string reason = p.skip_reason;
      if (p.trainable()) {
        try {
          inside_log_num(p, zero);
          usable.push_back(&in);
          continue;
        } catch (const UnreachableGold& e) {
          reason = e.what();
        }
      } else if (reason.empty()) {
        reason = in.expr ? "gold outside the hypothesis space" : "no gold expression";
      }
      spdlog::warn("skipping instance {}: {}", in.id, reason);
      rep.skipped.emplace_back(in.id, reason);
    }
  }
  if (usable.empty())
    throw TrainingError("no instance has a reachable gold expression");

  std::vector<PreparedInstance> data;
  data.reserve(usable.size());
  for (const Instance* in : usable)
    data.push_back(prepare_instance_growing(*in, settings, model.index, true));
  rep.used = data.size();

  if (config.neural) {
    Tokens words;
    std::vector<char> seen_symbol(kSymbolCount, 0);
    for (const auto& p : data) {
      words.insert(words.end(), p.context.words.begin(), p.context.words.end());
      std::function<void(const ExprTree&)> mark = [&](const ExprTree& t) {
        seen_symbol[static_cast<int>(t.symbol())] = 1;
        for (const auto& c : t.children())
          mark(c);
      };
      mark(*p.gold);
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    std::vector<Symbol> outputs;
    for (int s = 0; s < kSymbolCount; ++s)
      if (seen_symbol[s])
        outputs.push_back(static_cast<Symbol>(s));
    model.neural.emplace(config.neural_config, std::move(words), std::move(outputs));
    model.theta = model.neural->initial_parameters(derive_seed(config.seed, 1));
    for (auto& p : data)
      p.word_ids = model.neural->word_ids(p.context.words);
  }
  model.weights.assign(model.index.size(), 0.0);

  spdlog::info("training on {} instances ({} skipped), {} features{}", data.size(), rep.skipped.size(),
               model.index.size(), model.neural ? fmt::format(", {} neural parameters", model.theta.size()) : "");
  std::size_t productions = 0;
  for (const auto& p : data)
    productions += p.forest.production_count();
  spdlog::info("effective rule count: {} forest productions x {} patterns", productions, data.front().patterns.patterns().size());

  const TrainingObjective objective(data, model.index, model.neural ? &*model.neural : nullptr, config.l2,
                                    config.threads);
  std::vector<double> x = model.weights;
  x.insert(x.end(), model.theta.begin(), model.theta.end());

  if (config.effective_optimizer() == OptimizerKind::Lbfgs) {
    LbfgsOptions options;
    options.max_iterations = config.max_iterations;
    options.tolerance = config.tolerance;
    const auto trace = lbfgs_maximize(
      [&](const std::vector<double>& at, std::vector<double>& g) { return objective.evaluate(at, &g); }, x, options,
      [](int iter, double value) { spdlog::info("iteration {}: objective {:.6f}", iter, value); });
    rep.objectives = trace.objectives;
    rep.iterations = trace.iterations;
    rep.stop_reason = trace.stop_reason;
  } else {
    const bool adagrad = config.effective_optimizer() == OptimizerKind::Adagrad;
    std::mt19937_64 rng(derive_seed(config.seed, 2));
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = i;
    std::vector<double> g, history(x.size(), 0.0);
    std::size_t step = 0;
    double previous = 0.0;
    for (int epoch = 1; epoch <= config.max_iterations; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);
      double epoch_total = 0.0;
      for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
        const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                             order.begin() + static_cast<std::ptrdiff_t>(end));
        const double share = static_cast<double>(batch.size()) / static_cast<double>(data.size());
        epoch_total += objective.evaluate(x, &g, &batch, share);
        ++step;
        for (std::size_t k = 0; k < x.size(); ++k) {
          if (adagrad) {
            history[k] += g[k] * g[k];
            if (history[k] > 0)
              x[k] += config.learning_rate * g[k] / std::sqrt(history[k]);
          } else {
            x[k] += config.learning_rate / std::sqrt(static_cast<double>(step)) * g[k];
          }
        }
      }
      if (!std::isfinite(epoch_total))
        throw TrainingError("objective became non-finite in epoch " + std::to_string(epoch));
      rep.objectives.push_back(epoch_total);
      rep.iterations = epoch;
      spdlog::info("epoch {}: objective {:.6f}", epoch, epoch_total);
      if (epoch > 1 && std::abs(epoch_total - previous) <= config.tolerance * std::max(1.0, std::abs(epoch_total))) {
        rep.stop_reason = "converged";
        break;
      }
      previous = epoch_total;
    }
    if (rep.stop_reason.empty())
      rep.stop_reason = config.max_iterations == 0 ? "no iterations requested" : "iteration limit";
  }

  for (double v : x)
    if (!std::isfinite(v))
      throw TrainingError("training produced non-finite parameters");
  model.weights.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(model.index.size()));
  model.theta.assign(x.begin() + static_cast<std::ptrdiff_t>(model.index.size()), x.end());
  return model;
}

} // namespace hymath
