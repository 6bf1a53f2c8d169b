#include <hymath/evaluation.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include <hymath/inference.hpp>
#include <hymath/io.hpp>
#include <hymath/prepare.hpp>
#include <hymath/trainer.hpp>

namespace hymath {

using nlohmann::json;

json prediction_to_json(const Prediction& p)
{
  json j{{"id", p.id}};
  j["expr"] = p.expr ? json(*p.expr) : json(nullptr);
  if (p.answer)
    j["answer"] = rational_to_json(*p.answer);
  j["score"] = p.score;
  if (p.tree)
    j["tree"] = *p.tree;
  if (!p.contributions.empty())
    j["contributions"] = p.contributions;
  if (!p.k_best.empty()) {
    json arr = json::array();
    for (const auto& [e, s] : p.k_best)
      arr.push_back({{"expr", e}, {"score", s}});
    j["k_best"] = arr;
  }
  if (!p.error.empty())
    j["error"] = p.error;
  return j;
}

Prediction prediction_from_json(const json& j)
{
  Prediction p;
  const auto& id = j.at("id");
  p.id = id.is_string() ? id.get<std::string>() : id.dump();
  if (j.contains("expr") && !j.at("expr").is_null())
    p.expr = j.at("expr").get<std::string>();
  if (j.contains("answer") && !j.at("answer").is_null())
    p.answer = rational_from_json(j.at("answer"));
  p.score = j.value("score", 0.0);
  if (j.contains("tree"))
    p.tree = j.at("tree").get<std::string>();
  p.error = j.value("error", std::string());
  return p;
}

std::vector<Prediction> load_predictions(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open predictions " + path);
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      out.push_back(prediction_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw CorpusError(e.what(), line_no);
    }
  }
  return out;
}

void save_predictions(const std::string& path, const std::vector<Prediction>& predictions)
{
  std::ostringstream out;
  for (const auto& p : predictions)
    out << prediction_to_json(p).dump() << '\n';
  write_file_atomic(path, out.str());
}

std::vector<Prediction> predict(const Model& model, const std::vector<Instance>& inputs, const PredictOptions& options)
{
  PrepareSettings settings;
  settings.task = model.task;
  settings.features = model.features;
  settings.gold_numbers = model.gold_numbers;
  settings.lexicon = &model.lexicon;
  settings.neural = model.neural ? &*model.neural : nullptr;
  const ScoringView view = model.view();

  if (model.neural)
    for (Symbol s : task_operators(model.task))
      if (std::find(model.neural->outputs().begin(), model.neural->outputs().end(), s) ==
          model.neural->outputs().end())
        spdlog::warn("neural scorer has no output for {}; its pairs score 0", symbol_name(s));

  std::vector<Prediction> out(inputs.size());
  parallel_for(inputs.size(), options.threads, [&](std::size_t i) {
    const Instance& in = inputs[i];
    Prediction& pred = out[i];
    pred.id = in.id;
    try {
      const PreparedInstance p = prepare_instance(in, settings, model.index, false);
      const Decoded d = decode(p, view);
      pred.expr = serialize(d.expr);
      pred.score = d.score;
      try {
        pred.answer = evaluate(strip_answer_variable(d.expr, model.task));
      } catch (const EvalError&) {
      }
      if (options.inspect) {
        pred.tree = dump(d.tree, p.context.tokens);
        pred.contributions = node_contributions(d.tree, p.context, view, p.word_ids);
      }
      if (options.k > 1)
        for (const auto& [e, s] : k_best(p, view, options.k))
          pred.k_best.emplace_back(serialize(e), s);
    } catch (const EmptyHypothesisSpace& e) {
      pred.error = e.what();
    }
  });
  return out;
}

std::string to_string(EvalMode mode) { return mode == EvalMode::Answer ? "answer" : "equation"; }

EvalMode eval_mode_from_string(const std::string& text)
{
  if (text == "answer")
    return EvalMode::Answer;
  if (text == "equation")
    return EvalMode::Equation;
  throw std::invalid_argument("unknown evaluation mode '" + text + "'");
}

bool answers_match(const Rational& predicted, const Rational& gold)
{
  if (is_integer(gold))
    return predicted == gold;
  const Rational diff = boost::multiprecision::abs(Rational(predicted - gold));
  const Rational scale = std::max(Rational(1), Rational(boost::multiprecision::abs(gold)));
  return diff <= Rational(1, 10000) * scale;
}

std::optional<Rational> expression_answer(const ExprTree& tree)
{
  const ExprTree* body = &tree;
  if (tree.symbol() == Symbol::Equ) {
    if (tree.left().symbol() == Symbol::Var)
      body = &tree.right();
    else if (tree.right().symbol() == Symbol::Var)
      body = &tree.left();
    else
      return std::nullopt;
  }
  try {
    return evaluate(*body);
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

double EvalReport::accuracy() const
{
  return verdicts.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

json EvalReport::to_json() const
{
  json v = json::array();
  for (const auto& x : verdicts) {
    json o{{"id", x.id}, {"correct", x.correct}};
    if (!x.evaluable)
      o["evaluable"] = false;
    if (!x.note.empty())
      o["note"] = x.note;
    v.push_back(std::move(o));
  }
  json j{{"mode", hymath::to_string(mode)},
         {"total", verdicts.size()},
         {"correct", correct},
         {"accuracy", accuracy()},
         {"unevaluable", unevaluable},
         {"skipped", skipped},
         {"verdicts", v}};
  if (!folds.empty()) {
    json f = json::array();
    for (const auto& fold : folds)
      f.push_back({{"test_size", fold.test_size}, {"correct", fold.correct}, {"skipped", fold.skipped}});
    j["folds"] = f;
  }
  return j;
}

std::string EvalReport::summary() const
{
  std::ostringstream out;
  out << "mode " << hymath::to_string(mode) << ": " << correct << "/" << verdicts.size() << " correct ("
      << fmt::format("{:.2f}", 100.0 * accuracy()) << "%)";
  if (unevaluable)
    out << ", " << unevaluable << " unevaluable";
  if (skipped)
    out << ", " << skipped << " training instances skipped";
  out << '\n';
  for (std::size_t f = 0; f < folds.size(); ++f)
    out << "  fold " << f + 1 << ": " << folds[f].correct << "/" << folds[f].test_size << '\n';
  return out.str();
}

EvalReport evaluate(const std::vector<Prediction>& predictions, const std::vector<Instance>& golds, EvalMode mode)
{
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions)
    by_id.emplace(p.id, &p);

  EvalReport report;
  report.mode = mode;
  for (const auto& gold : golds) {
    Verdict v;
    v.id = gold.id;
    const auto it = by_id.find(gold.id);
    if (it == by_id.end() || !it->second->expr) {
      v.evaluable = false;
      v.note = it == by_id.end() ? "no prediction" : it->second->error;
    } else {
      const Prediction& pred = *it->second;
      try {
        const ExprTree predicted = parse_expression(*pred.expr);
        if (mode == EvalMode::Equation) {
          v.correct = equivalent(predicted, gold.gold());
        } else {
          std::optional<Rational> want = gold.answer;
          if (!want)
            want = expression_answer(gold.gold());
          const std::optional<Rational> got = pred.answer ? pred.answer : expression_answer(predicted);
          if (!want) {
            v.evaluable = false;
            v.note = "gold has no answer";
          } else if (!got) {
            v.evaluable = false;
            v.note = "prediction cannot be evaluated";
          } else {
            v.correct = answers_match(*got, *want);
          }
        }
      } catch (const ExprError& e) {
        v.evaluable = false;
        v.note = e.what();
      }
    }
    report.correct += v.correct ? 1 : 0;
    report.unevaluable += v.evaluable ? 0 : 1;
    report.verdicts.push_back(std::move(v));
  }
  return report;
}

std::vector<std::string> suspected_annotation_errors(const std::vector<Instance>& golds)
{
  std::vector<std::string> out;
  for (const auto& g : golds) {
    if (!g.answer || !g.expr)
      continue;
    const auto value = expression_answer(g.gold());
    if (value && !answers_match(*value, *g.answer))
      out.push_back(g.id);
  }
  return out;
}

} // namespace hymath
