#include <hymath/corpus.hpp>
#include <hymath/io.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace hymath {

using nlohmann::json;

ExprTree Instance::gold() const
{
  if (!expr)
    throw ExprError("instance " + id + " has no gold expression");
  return parse_expression(*expr);
}

Rational rational_from_json(const json& j)
{
  if (j.is_number_integer())
    return Rational(j.get<long long>());
  if (j.is_number())
    return rational_from_double(j.get<double>());
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    bool negative = !s.empty() && s[0] == '-';
    if (negative)
      s.erase(0, 1);
    const auto slash = s.find('/');
    std::optional<Rational> v;
    if (slash == std::string::npos) {
      v = parse_decimal(s);
    } else {
      auto n = parse_decimal(s.substr(0, slash));
      auto d = parse_decimal(s.substr(slash + 1));
      if (n && d && *d != 0)
        v = Rational(*n / *d);
    }
    if (!v)
      throw std::invalid_argument("not a number: '" + j.get<std::string>() + "'");
    return negative ? Rational(-*v) : *v;
  }
  throw std::invalid_argument("expected a number");
}

json rational_to_json(const Rational& value)
{
  if (is_integer(value) && boost::multiprecision::abs(value) < Rational(1LL << 53))
    return json(static_cast<long long>(boost::multiprecision::numerator(value)));
  const double d = to_double(value);
  if (is_terminating(value) && rational_from_double(d) == value)
    return json(d);
  return json(format_rational(value));
}

Instance instance_from_json(const json& j, bool require_expr)
{
  if (!j.is_object())
    throw std::invalid_argument("record is not an object");
  Instance in;
  if (!j.contains("id"))
    throw std::invalid_argument("missing field 'id'");
  const auto& id = j.at("id");
  in.id = id.is_string() ? id.get<std::string>() : id.dump();

  if (!j.contains("text") || !j.at("text").is_array())
    throw std::invalid_argument("'text' must be an array of tokens");
  for (const auto& t : j.at("text")) {
    if (!t.is_string())
      throw std::invalid_argument("'text' must contain strings");
    in.text.push_back(t.get<std::string>());
  }
  if (in.text.empty())
    throw std::invalid_argument("'text' is empty");

  if (j.contains("pos") && !j.at("pos").is_null()) {
    Tokens pos;
    for (const auto& t : j.at("pos"))
      pos.push_back(t.get<std::string>());
    if (pos.size() != in.text.size())
      throw std::invalid_argument("'pos' has " + std::to_string(pos.size()) + " tags for " +
                                  std::to_string(in.text.size()) + " tokens");
    in.pos = std::move(pos);
  }

  if (j.contains("expr") && !j.at("expr").is_null()) {
    in.expr = j.at("expr").get<std::string>();
    try {
      parse_expression(*in.expr);
    } catch (const ExprError& e) {
      throw std::invalid_argument(std::string("bad gold expression: ") + e.what());
    }
  } else if (require_expr) {
    throw std::invalid_argument("missing field 'expr'");
  }

  if (j.contains("answer") && !j.at("answer").is_null())
    in.answer = rational_from_json(j.at("answer"));

  if (j.contains("quantities") && !j.at("quantities").is_null()) {
    std::vector<GoldQuantity> qs;
    for (const auto& q : j.at("quantities")) {
      GoldQuantity g;
      const auto index = q.at("index").get<long long>();
      if (index < 0 || static_cast<std::size_t>(index) >= in.text.size())
        throw std::invalid_argument("quantity index " + std::to_string(index) + " out of range");
      g.index = static_cast<std::size_t>(index);
      g.value = rational_from_json(q.at("value"));
      if (q.contains("relevant") && !q.at("relevant").is_null())
        g.relevant = q.at("relevant").get<bool>();
      qs.push_back(std::move(g));
    }
    in.quantities = std::move(qs);
  }
  return in;
}

json instance_to_json(const Instance& in)
{
  json j;
  j["id"] = in.id;
  j["text"] = in.text;
  if (in.pos)
    j["pos"] = *in.pos;
  if (in.expr)
    j["expr"] = *in.expr;
  if (in.answer)
    j["answer"] = rational_to_json(*in.answer);
  if (in.quantities) {
    json qs = json::array();
    for (const auto& q : *in.quantities) {
      json o{{"index", q.index}, {"value", rational_to_json(q.value)}};
      if (q.relevant)
        o["relevant"] = *q.relevant;
      qs.push_back(std::move(o));
    }
    j["quantities"] = std::move(qs);
  }
  return j;
}

std::vector<Instance> read_corpus(std::istream& in, bool require_expr)
{
  std::vector<Instance> out;
  std::string line;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      out.push_back(instance_from_json(json::parse(line), require_expr));
    } catch (const std::exception& e) {
      throw CorpusError(e.what(), line_no);
    }
    if (!ids.insert(out.back().id).second)
      throw CorpusError("duplicate id '" + out.back().id + "'", line_no);
  }
  return out;
}

std::vector<Instance> load_corpus(const std::string& path, bool require_expr)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open corpus " + path);
  return read_corpus(in, require_expr);
}

void write_corpus(std::ostream& out, const std::vector<Instance>& corpus)
{
  for (const auto& in : corpus)
    out << instance_to_json(in).dump() << '\n';
}

void save_corpus(const std::string& path, const std::vector<Instance>& corpus)
{
  std::ostringstream out;
  write_corpus(out, corpus);
  write_file_atomic(path, out.str());
}

} // namespace hymath
