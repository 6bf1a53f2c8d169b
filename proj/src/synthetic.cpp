#include <hymath/synthetic.hpp>

#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace hymath {

using nlohmann::json;

TemplateSet TemplateSet::from_json(const json& j)
{
  TemplateSet set;
  for (const auto& t : j.at("templates")) {
    Template tpl;
    tpl.name = t.value("name", std::string("template") + std::to_string(set.templates.size()));
    tpl.text = t.at("text").get<std::string>();
    tpl.expr = t.at("expr").get<std::string>();
    tpl.weight = t.value("weight", 1.0);
    if (!(tpl.weight > 0))
      throw std::invalid_argument("template " + tpl.name + ": weight must be positive");
    set.templates.push_back(std::move(tpl));
  }
  if (set.templates.empty())
    throw std::invalid_argument("template set is empty");
  return set;
}

TemplateSet TemplateSet::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open templates " + path);
  return from_json(json::parse(in));
}

json TemplateSet::to_json() const
{
  json arr = json::array();
  for (const auto& t : templates)
    arr.push_back({{"name", t.name}, {"text", t.text}, {"expr", t.expr}, {"weight", t.weight}});
  return json{{"templates", arr}};
}

namespace {

const std::vector<Template> kReordering{
  {"minus", "what is {0} minus {1} ?", "{0}-{1}", 1.0},
  {"less-than", "what number is {1} less than {0} ?", "{0}-{1}", 1.0},
};

const std::vector<Template> kArithmetic{
  {"add-gain", "{person} has {0} {item} . {person2} gives {person} {1} more {item} . how many {item} does {person} have now ?",
   "{0}+{1}", 1.0},
  {"add-sum", "what is the sum of {0} and {1} ?", "{0}+{1}", 0.5},
  {"sub-lose", "{person} had {0} {item} and lost {1} of them . how many {item} are left ?", "{0}-{1}", 1.0},
  {"sub-less", "{person2} has {1} fewer {item} than {person} . {person} has {0} {item} . how many {item} does {person2} have ?",
   "{0}-{1}", 0.5},
  {"mul-each", "{person} buys {0} boxes with {1} {item} in each box . how many {item} does {person} buy ?", "{0}*{1}",
   1.0},
  {"mul-times", "what is {0} times {1} ?", "{0}*{1}", 0.5},
  {"div-share", "{person} shares {0} {item} equally among {1} friends . how many {item} does each friend get ?",
   "{0}/{1}", 1.0},
  {"div-by", "what is {0} divided by {1} ?", "{0}/{1}", 0.5},
};

const std::vector<Template> kExtra{
  {"minus", "what is {0} minus {1} ?", "{0}-{1}", 0.5},
  {"less-than", "what number is {1} less than {0} ?", "{0}-{1}", 0.5},
  {"add-then-sub", "{person} has {0} {item} , buys {1} more and then gives away {2} . how many {item} are left ?",
   "({0}+{1})-{2}", 0.5},
  {"distractor", "{person} is {2} years old and has {0} {item} . {person2} gives {person} {1} more {item} . how many {item} does {person} have ?",
   "{0}+{1}", 0.5},
};

const std::vector<std::string> kPeople{"mia", "sam", "lena", "omar", "jack", "nina", "ravi", "tom", "ana", "kim"};
const std::vector<std::string> kItems{"apples", "pens", "cards", "books", "stickers", "marbles", "cookies", "shells"};

class Draw
{
public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 rng_;
};

Rational draw_value(Draw& d)
{
  if (d.below(10) == 0) {
    // one-decimal value in [1.1, 9.9]
    std::size_t tenths = 11 + d.below(89);
    if (tenths % 10 == 0)
      ++tenths;
    return Rational(static_cast<long long>(tenths), 10);
  }
  return Rational(static_cast<long long>(2 + d.below(98)));
}

} // namespace

TemplateSet TemplateSet::builtin(const std::string& name)
{
  TemplateSet set;
  if (name == "reordering") {
    set.templates = kReordering;
  } else if (name == "arithmetic") {
    set.templates = kArithmetic;
  } else if (name == "mixed") {
    set.templates = kArithmetic;
    set.templates.insert(set.templates.end(), kExtra.begin(), kExtra.end());
  } else {
    throw std::invalid_argument("unknown built-in template set '" + name + "'");
  }
  return set;
}

std::vector<Instance> generate_synthetic(const TemplateSet& set, std::size_t count, std::uint64_t seed)
{
  if (set.templates.empty())
    throw std::invalid_argument("template set is empty");
  double total_weight = 0.0;
  for (const auto& t : set.templates)
    total_weight += t.weight;

  Draw d(seed);
  const std::regex slot(R"(\{(\d+)\})");
  std::vector<Instance> out;
  for (std::size_t n = 0; n < count; ++n) {
    double r = d.unit() * total_weight;
    std::size_t pick = 0;
    while (pick + 1 < set.templates.size() && r >= set.templates[pick].weight) {
      r -= set.templates[pick].weight;
      ++pick;
    }
    const Template& tpl = set.templates[pick];

    const std::string person = kPeople[d.below(kPeople.size())];
    std::string person2 = kPeople[d.below(kPeople.size())];
    while (person2 == person)
      person2 = kPeople[d.below(kPeople.size())];
    const std::string item = kItems[d.below(kItems.size())];

    std::map<int, Rational> values;
    auto value_of = [&](int k) -> const Rational& {
      auto it = values.find(k);
      if (it != values.end())
        return it->second;
      Rational v = draw_value(d);
      for (bool clash = true; clash;) {
        clash = false;
        for (const auto& [_, other] : values)
          clash = clash || other == v;
        if (clash)
          v = draw_value(d);
      }
      return values.emplace(k, v).first->second;
    };

    Instance in;
    in.id = "syn-" + std::to_string(n);
    std::vector<GoldQuantity> quantities;
    std::istringstream words(tpl.text);
    for (std::string w; words >> w;) {
      std::smatch m;
      if (std::regex_match(w, m, slot)) {
        const int k = std::stoi(m[1]);
        quantities.push_back(GoldQuantity{in.text.size(), value_of(k), std::nullopt});
        in.text.push_back(format_rational(value_of(k)));
        quantities.back().relevant = tpl.expr.find("{" + std::to_string(k) + "}") != std::string::npos;
      } else if (w == "{person}") {
        in.text.push_back(person);
      } else if (w == "{person2}") {
        in.text.push_back(person2);
      } else if (w == "{item}") {
        in.text.push_back(item);
      } else {
        in.text.push_back(w);
      }
    }
    std::string expr;
    std::size_t last = 0;
    for (std::sregex_iterator it(tpl.expr.begin(), tpl.expr.end(), slot), end; it != end; ++it) {
      expr += tpl.expr.substr(last, static_cast<std::size_t>(it->position()) - last);
      expr += format_rational(value_of(std::stoi((*it)[1])));
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    expr += tpl.expr.substr(last);
    const ExprTree tree = parse_expression(expr);
    in.expr = serialize(tree);
    in.answer = evaluate(tree);
    in.quantities = std::move(quantities);
    out.push_back(std::move(in));
  }
  return out;
}

} // namespace hymath
