#include <hymath/cli.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <hymath/corpus.hpp>
#include <hymath/evaluation.hpp>
#include <hymath/experiment.hpp>
#include <hymath/hybrid_tree.hpp>
#include <hymath/io.hpp>
#include <hymath/synthetic.hpp>
#include <hymath/trainer.hpp>

namespace hymath::cli {

using nlohmann::json;

namespace {

struct Settings
{
  std::string config;
  std::string verbosity = "info";

  std::string corpus, model_out, model, input, output, pred, gold, templates, out, grid, lexicon, json_out;
  std::string builtin = "mixed";
  std::string mode = "answer";
  int folds = 3;
  std::size_t count = 100;
  std::size_t k = 1;
  bool inspect = false;
  bool report_self_corrections = false;
  std::size_t top = 20;
  std::size_t limit = 5;

  std::string operators = "Add,Sub,Mul,Div";
  bool inverse_ops = false;
  bool monotone_patterns = false;
  std::string var_position = "none";
  int max_vars = 0;
  bool gold_numbers = false;
  bool no_pos = false;
  bool no_lex = false;
  bool no_id = false;

  double l2 = 0.01;
  std::string optimizer = "auto";
  int iters = 100;
  double tolerance = 1e-7;
  double lr = 0.1;
  int batch = 8;
  bool neural = false;
  int window = 0;
  int embedding_dim = 50;
  int hidden_dim = 100;
  std::string activation = "tanh";

  std::uint64_t seed = 0;
  int threads = 1;
};

std::string show(const std::string& v) { return v; }
std::string show(double v) { return fmt::format("{}", v); }
template <class T>
std::string show(T v)
{
  return std::to_string(v);
}

json value_json(const std::string& v) { return v; }
json value_json(double v) { return v; }
template <class T>
json value_json(T v)
{
  return v;
}

struct Entry
{
  FlagDoc doc;
  CLI::Option* option = nullptr;
  std::function<json()> value;
};

class Parser
{
public:
  // Without `enforce_required`, required paths may be missing: the first pass
  // only finds the config file and which flags were given.
  explicit Parser(Settings& s, bool enforce_required = true)
    : app_("Text-to-math semantic parser over latent hybrid trees", "hymath"), enforce_required_(enforce_required)
  {
    app_.require_subcommand(1, 1);
    define(s);
  }

  CLI::App& app() { return app_; }
  const std::vector<Entry>& entries() const { return entries_; }

  CLI::App* active() const
  {
    const auto subs = app_.get_subcommands();
    return subs.empty() ? nullptr : subs.front();
  }

private:
  template <class T>
  CLI::Option* add(CLI::App* sub, const std::string& name, T& var, const std::string& type,
                   const std::string& description, const std::string& example)
  {
    const std::string def = show(var);
    CLI::Option* o = sub->add_option("--" + name, var, fmt::format("{} (default: {})", description, def));
    entries_.push_back({{sub->get_name(), name, type, def, description, example}, o, [&var] {
                          return value_json(var);
                        }});
    return o;
  }

  CLI::Option* flag(CLI::App* sub, const std::string& name, bool& var, const std::string& description)
  {
    CLI::Option* o = sub->add_flag("--" + name, var, fmt::format("{} (default: off)", description));
    entries_.push_back({{sub->get_name(), name, "flag", "off", description, "true"}, o, [&var] { return json(var); }});
    return o;
  }

  CLI::Option* path(CLI::App* sub, const std::string& name, std::string& var, const std::string& description,
                    bool required, bool must_exist)
  {
    CLI::Option* o = sub->add_option("--" + name, var,
                                     required ? description + " (required)" : description + " (default: none)");
    if (required && enforce_required_)
      o->required();
    if (must_exist)
      o->check(CLI::ExistingFile);
    const std::string example = name == "lexicon"                            ? "lexicon.tsv"
                                : description.find("JSONL") != std::string::npos ? "data.jsonl"
                                : description.find("JSON") != std::string::npos  ? "file.json"
                                                                                 : "model.txt";
    entries_.push_back({{sub->get_name(), name, "path", required ? "" : "none", description, example}, o,
                        [&var] { return json(var); }});
    return o;
  }

  void common(CLI::App* sub, Settings& s)
  {
    path(sub, "config", s.config, "JSON file of flag values; flags on the command line win", false, true);
    add(sub, "verbosity", s.verbosity, "text", "log level: quiet, warn, info or debug", "debug")
      ->check(CLI::IsMember({"quiet", "warn", "info", "debug"}));
  }

  void task(CLI::App* sub, Settings& s)
  {
    add(sub, "operators", s.operators, "text", "comma-separated operators from Add, Sub, Mul, Div", "Add,Sub");
    flag(sub, "inverse-ops", s.inverse_ops, "add the inverse operators SubR and DivR");
    flag(sub, "monotone-patterns", s.monotone_patterns, "with --inverse-ops: keep only the 8 A-before-B patterns");
    add(sub, "var-position", s.var_position, "text", "answer variable: none, prefix (X=e) or suffix (e=X)", "prefix")
      ->check(CLI::IsMember({"none", "prefix", "suffix"}));
    add(sub, "max-vars", s.max_vars, "int", "equation parsing with up to this many variables (0: off)", "1")
      ->check(CLI::Range(0, 2));
    flag(sub, "gold-numbers", s.gold_numbers, "take quantities and relevance from annotations");
    flag(sub, "no-pos", s.no_pos, "drop POS features");
    flag(sub, "no-lex", s.no_lex, "drop lexicon features");
    flag(sub, "no-id", s.no_id, "drop the number relevance feature");
    path(sub, "lexicon", s.lexicon, "lexicon file, one 'phrase<TAB>operator' per line", false, true);
  }

  void training(CLI::App* sub, Settings& s)
  {
    add(sub, "l2", s.l2, "float", "L2 regularization strength", "0.1")->check(CLI::NonNegativeNumber);
    add(sub, "optimizer", s.optimizer, "text", "auto, lbfgs, sgd or adagrad (auto: lbfgs, adagrad with --neural)",
        "sgd")
      ->check(CLI::IsMember({"auto", "lbfgs", "sgd", "adagrad"}));
    add(sub, "iters", s.iters, "int", "L-BFGS iterations or stochastic epochs", "5")->check(CLI::NonNegativeNumber);
    add(sub, "tolerance", s.tolerance, "float", "relative objective change that stops training", "1e-5")
      ->check(CLI::NonNegativeNumber);
    add(sub, "lr", s.lr, "float", "learning rate of sgd and adagrad", "0.5")->check(CLI::PositiveNumber);
    add(sub, "batch", s.batch, "int", "minibatch size of sgd and adagrad", "4")->check(CLI::PositiveNumber);
    flag(sub, "neural", s.neural, "add the neural window scorer");
    add(sub, "window", s.window, "int", "neural context radius L (needs --neural)", "1")->check(CLI::Range(0, 10));
    add(sub, "embedding-dim", s.embedding_dim, "int", "neural embedding size (needs --neural)", "8")
      ->check(CLI::PositiveNumber);
    add(sub, "hidden-dim", s.hidden_dim, "int", "neural hidden layer size (needs --neural)", "8")
      ->check(CLI::PositiveNumber);
    add(sub, "activation", s.activation, "text", "neural activation, tanh or relu (needs --neural)", "relu")
      ->check(CLI::IsMember({"tanh", "relu"}));
    add(sub, "seed", s.seed, "int", "seed of every random choice", "7");
    add(sub, "threads", s.threads, "int", "worker threads for per-instance inference", "2")
      ->check(CLI::PositiveNumber);
  }

  void define(Settings& s)
  {
    auto* train = app_.add_subcommand("train", "fit a model on a JSONL corpus");
    path(train, "corpus", s.corpus, "training corpus (JSONL)", true, true);
    path(train, "model-out", s.model_out, "where to write the model", true, false);
    task(train, s);
    training(train, s);
    common(train, s);

    auto* decode = app_.add_subcommand("decode", "predict expressions for a JSONL corpus");
    path(decode, "model", s.model, "trained model", true, true);
    path(decode, "input", s.input, "instances to decode (JSONL; expr optional)", true, true);
    path(decode, "output", s.output, "predictions (JSONL)", true, false);
    add(decode, "k", s.k, "int", "also list the k best expressions", "3")->check(CLI::PositiveNumber);
    flag(decode, "inspect", s.inspect, "include hybrid trees and per-node scores");
    add(decode, "threads", s.threads, "int", "worker threads", "2")->check(CLI::PositiveNumber);
    common(decode, s);

    auto* eval = app_.add_subcommand("eval", "score predictions against gold instances");
    path(eval, "pred", s.pred, "predictions (JSONL)", true, true);
    path(eval, "gold", s.gold, "gold corpus (JSONL)", true, true);
    add(eval, "mode", s.mode, "text", "answer or equation", "equation")->check(CLI::IsMember({"answer", "equation"}));
    path(eval, "json-out", s.json_out, "also write the report as JSON", false, false);
    flag(eval, "report-self-corrections", s.report_self_corrections,
         "list gold instances whose answer disagrees with their expression (scores unchanged)");
    common(eval, s);

    auto* cv = app_.add_subcommand("cv", "k-fold cross-validation");
    path(cv, "corpus", s.corpus, "corpus (JSONL)", true, true);
    add(cv, "folds", s.folds, "int", "number of folds", "5")->check(CLI::Range(2, 1000));
    add(cv, "mode", s.mode, "text", "answer or equation", "equation")->check(CLI::IsMember({"answer", "equation"}));
    path(cv, "json-out", s.json_out, "also write the report as JSON", false, false);
    flag(cv, "report-self-corrections", s.report_self_corrections,
         "list gold instances whose answer disagrees with their expression (scores unchanged)");
    task(cv, s);
    training(cv, s);
    common(cv, s);

    auto* synth = app_.add_subcommand("synth", "generate a synthetic corpus");
    path(synth, "templates", s.templates, "template set (JSON); overrides --builtin", false, true);
    add(synth, "builtin", s.builtin, "text", "built-in template set: mixed, reordering or arithmetic", "reordering")
      ->check(CLI::IsMember({"mixed", "reordering", "arithmetic"}));
    add(synth, "count", s.count, "int", "number of instances", "10");
    add(synth, "seed", s.seed, "int", "generator seed", "7");
    path(synth, "out", s.out, "corpus to write (JSONL)", true, false);
    common(synth, s);

    auto* inspect = app_.add_subcommand("inspect", "summarize a model and show decoded hybrid trees");
    path(inspect, "model", s.model, "trained model", true, true);
    path(inspect, "input", s.input, "instances to decode and show (JSONL)", false, true);
    add(inspect, "top", s.top, "int", "feature weights to list", "5");
    add(inspect, "limit", s.limit, "int", "instances to show", "2");
    common(inspect, s);

    auto* ablate = app_.add_subcommand("ablate", "train and evaluate a grid of variants");
    path(ablate, "corpus", s.corpus, "corpus (JSONL)", true, true);
    path(ablate, "grid", s.grid, "variant grid (JSON)", true, true);
    path(ablate, "json-out", s.json_out, "also write the table as JSON", false, false);
    task(ablate, s);
    training(ablate, s);
    common(ablate, s);
  }

  CLI::App app_;
  bool enforce_required_;
  std::vector<Entry> entries_;
};

std::vector<std::string> reversed(std::vector<std::string> args)
{
  std::reverse(args.begin(), args.end());
  return args;
}

std::string config_token(const std::string& name, const json& v)
{
  if (v.is_string())
    return "--" + name + "=" + v.get<std::string>();
  if (v.is_boolean())
    return "--" + name + "=" + (v.get<bool>() ? "true" : "false");
  if (v.is_number())
    return "--" + name + "=" + v.dump();
  throw UsageError(fmt::format("config value of '{}' must be a string, number or boolean", name));
}

struct Parsed
{
  Settings settings;
  std::unique_ptr<Parser> parser;
  std::string subcommand;
  std::map<std::string, std::string> source;  // flag name -> flag, config or default
};

// Throws CLI::ParseError (including help requests) and UsageError.
void parse(const std::vector<std::string>& args, Parsed& out)
{
  Settings first;
  Parser plain(first, false);
  plain.app().parse(reversed(args));
  const std::string sub = plain.active()->get_name();

  std::map<std::string, bool> given;
  for (const auto& e : plain.entries())
    if (e.doc.subcommand == sub)
      given[e.doc.name] = e.option->count() > 0;

  std::vector<std::string> full{args.front()};
  std::map<std::string, bool> from_config;
  if (!first.config.empty()) {
    json j;
    try {
      j = json::parse(read_file(first.config));
    } catch (const std::exception& e) {
      throw UsageError(fmt::format("config {}: {}", first.config, e.what()));
    }
    if (!j.is_object())
      throw UsageError("config must be a JSON object");
    std::map<std::string, bool> known_anywhere;
    for (const auto& e : plain.entries())
      known_anywhere[e.doc.name] = true;
    for (const auto& [key, value] : j.items()) {
      if (!known_anywhere.count(key) || key == "config")
        throw UsageError(fmt::format("config key '{}' is not a flag", key));
      if (!given.count(key) || given[key])
        continue;  // another subcommand's flag, or overridden on the command line
      full.push_back(config_token(key, value));
      from_config[key] = true;
    }
  }
  full.insert(full.end(), args.begin() + 1, args.end());

  out.parser = std::make_unique<Parser>(out.settings);
  out.parser->app().parse(reversed(full));
  out.subcommand = sub;
  for (const auto& [name, g] : given)
    out.source[name] = g ? "flag" : (from_config.count(name) ? "config" : "default");

  const Settings& s = out.settings;
  if (!s.neural)
    for (const char* name : {"window", "embedding-dim", "hidden-dim", "activation"})
      if (out.source.count(name) && out.source[name] != "default")
        throw UsageError(fmt::format("--{} needs --neural", name));
  if (s.max_vars > 0 && s.var_position != "none")
    throw UsageError("--max-vars and --var-position are alternatives");
}

json settings_json(const Parsed& p)
{
  json j = json::object();
  for (const auto& e : p.parser->entries())
    if (e.doc.subcommand == p.subcommand)
      j[e.doc.name] = e.value();
  return j;
}

std::string lower(std::string s)
{
  for (auto& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

TaskConfig task_config(const Settings& s)
{
  TaskConfig t;
  t.operators.clear();
  std::string rest = s.operators;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string name = lower(rest.substr(0, comma));
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    static const std::map<std::string, Symbol> ops{
      {"add", Symbol::Add}, {"sub", Symbol::Sub}, {"mul", Symbol::Mul}, {"div", Symbol::Div}};
    const auto it = ops.find(name);
    if (it == ops.end())
      throw UsageError(fmt::format("unknown operator '{}' in --operators", name));
    if (std::find(t.operators.begin(), t.operators.end(), it->second) == t.operators.end())
      t.operators.push_back(it->second);
  }
  if (t.operators.empty())
    throw UsageError("--operators is empty");
  t.inverse_ops = s.inverse_ops;
  t.monotone_patterns_only = s.monotone_patterns;
  t.var_position = var_position_from_string(s.var_position);
  t.max_vars = s.max_vars;
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return t;
}

ModelSpec model_spec(const Settings& s)
{
  ModelSpec spec;
  spec.task = task_config(s);
  spec.features.use_pos = !s.no_pos;
  spec.features.use_lexicon = !s.no_lex;
  spec.features.use_relevance = !s.no_id;
  spec.gold_numbers = s.gold_numbers;
  if (!s.lexicon.empty())
    spec.lexicon = Lexicon::load(s.lexicon);
  return spec;
}

TrainConfig train_config(const Settings& s)
{
  TrainConfig c;
  if (s.optimizer != "auto")
    c.optimizer = optimizer_from_string(s.optimizer);
  c.l2 = s.l2;
  c.max_iterations = s.iters;
  c.tolerance = s.tolerance;
  c.learning_rate = s.lr;
  c.batch_size = s.batch;
  c.neural = s.neural;
  c.neural_config.window = s.window;
  c.neural_config.embedding_dim = s.embedding_dim;
  c.neural_config.hidden_dim = s.hidden_dim;
  c.neural_config.activation = activation_from_string(s.activation);
  c.seed = s.seed;
  c.threads = s.threads;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void report_corrections(const std::vector<Instance>& golds, std::ostream& out)
{
  const auto ids = suspected_annotation_errors(golds);
  out << "suspected annotation errors (scores unchanged): " << ids.size() << '\n';
  for (const auto& id : ids)
    out << "  " << id << '\n';
}

int cmd_train(const Settings& s, std::ostream& out)
{
  const ModelSpec spec = model_spec(s);
  const TrainConfig config = train_config(s);
  const auto corpus = load_corpus(s.corpus);
  TrainReport rep;
  const Model model = train(corpus, spec, config, &rep);
  model.save(s.model_out);
  out << fmt::format("trained on {} of {} instances in {} iterations ({})\n", rep.used, corpus.size(),
                     rep.iterations, rep.stop_reason);
  for (const auto& [id, reason] : rep.skipped)
    out << "  skipped " << id << ": " << reason << '\n';
  out << fmt::format("{} features; model written to {}\n", model.index.size(), s.model_out);
  return kSuccess;
}

int cmd_decode(const Settings& s, std::ostream& out)
{
  const Model model = Model::load(s.model);
  const auto inputs = load_corpus(s.input, false);
  PredictOptions opts;
  opts.threads = s.threads;
  opts.k = s.k;
  opts.inspect = s.inspect;
  const auto preds = predict(model, inputs, opts);
  save_predictions(s.output, preds);
  std::size_t failed = 0;
  for (const auto& p : preds)
    failed += p.expr ? 0 : 1;
  out << fmt::format("{} predictions written to {} ({} without an expression)\n", preds.size(), s.output, failed);
  if (s.inspect)
    for (const auto& p : preds) {
      out << p.id << ": " << p.expr.value_or("(none)") << fmt::format("  score {:.6f}\n", p.score);
      if (p.tree)
        out << *p.tree << '\n';
    }
  return kSuccess;
}

int cmd_eval(const Settings& s, std::ostream& out)
{
  const auto preds = load_predictions(s.pred);
  const auto golds = load_corpus(s.gold);
  const EvalReport report = evaluate(preds, golds, eval_mode_from_string(s.mode));
  out << report.summary();
  if (s.report_self_corrections)
    report_corrections(golds, out);
  if (!s.json_out.empty())
    write_file_atomic(s.json_out, report.to_json().dump(2) + "\n");
  return kSuccess;
}

int cmd_cv(const Settings& s, std::ostream& out)
{
  const ModelSpec spec = model_spec(s);
  const TrainConfig config = train_config(s);
  const auto corpus = load_corpus(s.corpus);
  const EvalReport report = cross_validate(corpus, s.folds, spec, config, eval_mode_from_string(s.mode), s.seed);
  out << report.summary();
  if (s.report_self_corrections)
    report_corrections(corpus, out);
  if (!s.json_out.empty())
    write_file_atomic(s.json_out, report.to_json().dump(2) + "\n");
  return kSuccess;
}

int cmd_synth(const Settings& s, std::ostream& out)
{
  const TemplateSet set = s.templates.empty() ? TemplateSet::builtin(s.builtin) : TemplateSet::load(s.templates);
  const auto corpus = generate_synthetic(set, s.count, s.seed);
  save_corpus(s.out, corpus);
  out << fmt::format("{} instances written to {}\n", corpus.size(), s.out);
  return kSuccess;
}

int cmd_inspect(const Settings& s, std::ostream& out)
{
  const Model model = Model::load(s.model);
  out << "task " << task_to_json(model.task).dump() << '\n';
  out << fmt::format("{} features, {} lexicon entries, neural {}\n", model.index.size(), model.lexicon.entries().size(),
                     model.neural ? fmt::format("on ({} parameters)", model.theta.size()) : std::string("off"));
  std::vector<std::size_t> order(model.weights.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(model.weights[a]) > std::abs(model.weights[b]); });
  out << "largest weights:\n";
  for (std::size_t r = 0; r < std::min(s.top, order.size()); ++r)
    out << fmt::format("  {:+.4f}  {}\n", model.weights[order[r]], model.index.name(static_cast<int>(order[r])));
  if (s.input.empty())
    return kSuccess;

  auto inputs = load_corpus(s.input, false);
  if (inputs.size() > s.limit)
    inputs.resize(s.limit);
  PredictOptions opts;
  opts.inspect = true;
  for (const auto& p : predict(model, inputs, opts)) {
    out << '\n' << p.id << ": " << p.expr.value_or("(none: " + p.error + ")") << fmt::format("  score {:.6f}\n", p.score);
    if (p.tree)
      out << *p.tree << '\n';
    if (!p.contributions.empty()) {
      out << "node scores (preorder):";
      for (double c : p.contributions)
        out << fmt::format(" {:.4f}", c);
      out << '\n';
    }
  }
  return kSuccess;
}

int cmd_ablate(const Settings& s, std::ostream& out)
{
  const ModelSpec spec = model_spec(s);
  const TrainConfig config = train_config(s);
  const auto corpus = load_corpus(s.corpus);
  json j;
  try {
    j = json::parse(read_file(s.grid));
  } catch (const json::exception& e) {
    throw ExperimentError(fmt::format("grid {}: {}", s.grid, e.what()));
  }
  const Grid grid = grid_from_json(j, spec, config);
  const auto rows = run_ablation_grid(corpus, grid);
  out << grid_table(rows);
  if (!s.json_out.empty())
    write_file_atomic(s.json_out, grid_to_json(rows).dump(2) + "\n");
  return kSuccess;
}

spdlog::level::level_enum log_level(const std::string& v)
{
  if (v == "quiet")
    return spdlog::level::err;
  if (v == "warn")
    return spdlog::level::warn;
  if (v == "debug")
    return spdlog::level::debug;
  return spdlog::level::info;
}

// Routes the default logger to `err` for the duration of one run.
class LogScope
{
public:
  LogScope(std::ostream& err, spdlog::level::level_enum level) : previous_(spdlog::default_logger())
  {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    sink->set_pattern("[%l] %v");
    auto logger = std::make_shared<spdlog::logger>("hymath-cli", sink);
    logger->set_level(level);
    spdlog::set_default_logger(logger);
  }
  ~LogScope() { spdlog::set_default_logger(previous_); }

private:
  std::shared_ptr<spdlog::logger> previous_;
};

int dispatch(const Parsed& p, std::ostream& out)
{
  const Settings& s = p.settings;
  if (p.subcommand == "train")
    return cmd_train(s, out);
  if (p.subcommand == "decode")
    return cmd_decode(s, out);
  if (p.subcommand == "eval")
    return cmd_eval(s, out);
  if (p.subcommand == "cv")
    return cmd_cv(s, out);
  if (p.subcommand == "synth")
    return cmd_synth(s, out);
  if (p.subcommand == "inspect")
    return cmd_inspect(s, out);
  if (p.subcommand == "ablate")
    return cmd_ablate(s, out);
  throw std::logic_error("unhandled subcommand " + p.subcommand);
}

} // namespace

std::vector<FlagDoc> flag_registry()
{
  Settings s;
  Parser p(s);
  std::vector<FlagDoc> out;
  for (const auto& e : p.entries())
    out.push_back(e.doc);
  return out;
}

std::vector<std::string> subcommands()
{
  Settings s;
  Parser p(s);
  std::vector<std::string> out;
  for (const auto* sub : p.app().get_subcommands({}))
    out.push_back(sub->get_name());
  return out;
}

std::string help_text(const std::string& subcommand)
{
  Settings s;
  Parser p(s);
  return p.app().get_subcommand(subcommand)->help();
}

json resolve(const std::vector<std::string>& args)
{
  if (args.empty())
    throw UsageError("missing subcommand");
  Parsed p;
  try {
    parse(args, p);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  return settings_json(p);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  Parsed p;
  try {
    if (args.empty()) {
      Settings s;
      Parser parser(s);
      err << parser.app().help();
      return kUsage;
    }
    parse(args, p);
  } catch (const CLI::CallForHelp&) {
    Settings s;
    Parser parser(s);
    CLI::App* sub = nullptr;
    try {
      sub = parser.app().get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
    }
    out << (sub ? sub->help() : parser.app().help());
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  LogScope logs(err, log_level(p.settings.verbosity));
  spdlog::info("hymath {}: settings {}", p.subcommand, settings_json(p).dump());
  std::string sources;
  for (const auto& [name, source] : p.source)
    if (source != "default")
      sources += fmt::format(" {}={}", name, source);
  spdlog::info("non-default sources:{}", sources.empty() ? " none" : sources);

  try {
    return dispatch(p, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

} // namespace hymath::cli
