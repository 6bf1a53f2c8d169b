#include <hymath/model.hpp>
#include <hymath/io.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hymath {

using nlohmann::json;

namespace {

constexpr const char* kMagic = "hymath-model 1";

std::string hex(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex(const std::string& s)
{
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ModelFormatError("bad number '" + s + "'");
  return v;
}

class LineReader
{
public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::string next()
  {
    std::string line;
    if (!std::getline(in_, line))
      throw ModelFormatError("unexpected end of model file at line " + std::to_string(line_no_));
    ++line_no_;
    return line;
  }

  // "<keyword> <count>"
  std::size_t header(const std::string& keyword)
  {
    const std::string line = next();
    std::istringstream ls(line);
    std::string k;
    std::size_t count = 0;
    if (!(ls >> k >> count) || k != keyword)
      throw ModelFormatError("expected '" + keyword + "' at line " + std::to_string(line_no_));
    return count;
  }

private:
  std::istringstream in_;
  int line_no_ = 0;
};

} // namespace

json task_to_json(const TaskConfig& task)
{
  json ops = json::array();
  for (Symbol s : task.operators)
    ops.push_back(std::string(symbol_name(s)));
  return json{{"operators", ops},
              {"inverse_ops", task.inverse_ops},
              {"monotone_patterns_only", task.monotone_patterns_only},
              {"max_vars", task.max_vars},
              {"var_position", to_string(task.var_position)},
              {"max_operator_nodes", task.max_operator_nodes},
              {"require_all_quantities", task.require_all_quantities}};
}

TaskConfig task_from_json(const json& j)
{
  TaskConfig t;
  if (j.contains("operators")) {
    t.operators.clear();
    for (const auto& o : j.at("operators"))
      t.operators.push_back(symbol_from_name(o.get<std::string>()));
  }
  t.inverse_ops = j.value("inverse_ops", t.inverse_ops);
  t.monotone_patterns_only = j.value("monotone_patterns_only", t.monotone_patterns_only);
  t.max_vars = j.value("max_vars", t.max_vars);
  if (j.contains("var_position"))
    t.var_position = var_position_from_string(j.at("var_position").get<std::string>());
  t.max_operator_nodes = j.value("max_operator_nodes", t.max_operator_nodes);
  t.require_all_quantities = j.value("require_all_quantities", t.require_all_quantities);
  t.validate();
  return t;
}

ScoringView Model::view() const
{
  ScoringView v;
  v.index = &index;
  v.lambda = weights;
  v.neural = neural ? &*neural : nullptr;
  v.theta = theta;
  return v;
}

std::string Model::to_text() const
{
  if (weights.size() != index.size())
    throw ModelFormatError("weight count differs from feature count");
  std::ostringstream out;
  out << kMagic << '\n';
  json config{{"task", task_to_json(task)},
              {"features", {{"pos", features.use_pos}, {"lexicon", features.use_lexicon}, {"relevance", features.use_relevance}}},
              {"gold_numbers", gold_numbers}};
  if (neural) {
    const auto& c = neural->config();
    config["neural"] = {{"embedding_dim", c.embedding_dim},
                        {"hidden_dim", c.hidden_dim},
                        {"window", c.window},
                        {"activation", to_string(c.activation)}};
  }
  out << "config " << config.dump() << '\n';

  out << "lexicon " << lexicon.entries().size() << '\n';
  for (const auto& e : lexicon.entries()) {
    for (std::size_t i = 0; i < e.phrase.size(); ++i)
      out << (i ? " " : "") << e.phrase[i];
    out << '\t' << symbol_name(e.op) << '\n';
  }

  out << "features " << index.size() << '\n';
  for (std::size_t i = 0; i < index.size(); ++i)
    out << hex(weights[i]) << '\t' << index.name(static_cast<int>(i)) << '\n';

  if (neural) {
    const auto& vocab = neural->vocabulary();
    out << "vocabulary " << vocab.size() << '\n';
    for (const auto& w : vocab)
      out << w << '\n';
    out << "outputs " << neural->outputs().size() << '\n';
    for (Symbol s : neural->outputs())
      out << symbol_name(s) << '\n';
    out << "theta " << theta.size() << '\n';
    for (double v : theta)
      out << hex(v) << '\n';
  }
  out << "end\n";
  return out.str();
}

Model Model::from_text(const std::string& text)
{
  LineReader r(text);
  if (r.next() != kMagic)
    throw ModelFormatError("not a model file (bad header)");
  Model m;
  const std::string config_line = r.next();
  if (config_line.rfind("config ", 0) != 0)
    throw ModelFormatError("missing config line");
  json config;
  try {
    config = json::parse(config_line.substr(7));
    m.task = task_from_json(config.at("task"));
    const auto& f = config.at("features");
    m.features.use_pos = f.at("pos").get<bool>();
    m.features.use_lexicon = f.at("lexicon").get<bool>();
    m.features.use_relevance = f.at("relevance").get<bool>();
    m.gold_numbers = config.value("gold_numbers", false);
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("bad config: ") + e.what());
  }

  std::vector<LexiconEntry> entries;
  for (std::size_t i = 0, n = r.header("lexicon"); i < n; ++i) {
    const std::string line = r.next();
    std::istringstream one(line + "\n");
    auto lex = Lexicon::parse(one);
    if (lex.entries().size() != 1)
      throw ModelFormatError("bad lexicon entry '" + line + "'");
    entries.push_back(lex.entries().front());
  }
  m.lexicon = Lexicon(std::move(entries));

  const std::size_t feature_count = r.header("features");
  m.weights.reserve(feature_count);
  for (std::size_t i = 0; i < feature_count; ++i) {
    const std::string line = r.next();
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ModelFormatError("bad feature line '" + line + "'");
    m.weights.push_back(parse_hex(line.substr(0, tab)));
    if (m.index.intern(line.substr(tab + 1)) != static_cast<int>(i))
      throw ModelFormatError("duplicate feature '" + line.substr(tab + 1) + "'");
  }

  if (config.contains("neural")) {
    const auto& nj = config.at("neural");
    NeuralConfig nc;
    nc.embedding_dim = nj.at("embedding_dim").get<int>();
    nc.hidden_dim = nj.at("hidden_dim").get<int>();
    nc.window = nj.at("window").get<int>();
    nc.activation = activation_from_string(nj.at("activation").get<std::string>());
    std::vector<std::string> vocab;
    for (std::size_t i = 0, n = r.header("vocabulary"); i < n; ++i)
      vocab.push_back(r.next());
    std::vector<Symbol> outputs;
    for (std::size_t i = 0, n = r.header("outputs"); i < n; ++i)
      outputs.push_back(symbol_from_name(r.next()));
    m.neural.emplace(nc, std::move(vocab), std::move(outputs));
    const std::size_t count = r.header("theta");
    if (count != m.neural->parameter_count())
      throw ModelFormatError("neural parameter count does not match the architecture");
    m.theta.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
      m.theta.push_back(parse_hex(r.next()));
  }
  if (r.next() != "end")
    throw ModelFormatError("missing end marker");
  return m;
}

void Model::save(const std::string& path) const { write_file_atomic(path, to_text()); }

Model Model::load(const std::string& path) { return from_text(read_file(path)); }

} // namespace hymath
