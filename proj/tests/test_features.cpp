#include <doctest.h>

#include <sstream>

#include <hymath/features.hpp>
#include <hymath/neural.hpp>

#include "oracle.hpp"

using namespace hymath;

namespace {

Tokens split(const std::string& text)
{
  std::istringstream in(text);
  Tokens out;
  for (std::string w; in >> w;)
    out.push_back(w);
  return out;
}

const Lexicon& less_than()
{
  static const Lexicon lex({LexiconEntry{{"less", "than"}, Symbol::Sub}});
  return lex;
}

// "7 less than 12" as 12 - 7 with the operands reordered
TextMathTree less_than_tree()
{
  return TextMathTree::binary(Symbol::Sub, WordPattern::from_name("BwA"), {{1, 3}},
                              TextMathTree::leaf(NodeKind::con(12), {3, 4}),
                              TextMathTree::leaf(NodeKind::con(7), {0, 1}));
}

SentenceContext less_than_context(FeatureOptions options = {})
{
  const Tokens x = split("7 less than 12");
  return SentenceContext::make(x, Tokens{"CD", "JJR", "IN", "CD"}, detect_quantities(x), &less_than(), options);
}

std::map<std::string, int> entries(const FeatureVector& v) { return v.entries(); }

// tiny scorer: d = 2, h = 2, L = 1, tanh; theta[k] = ((k mod 7) - 3) / 10
NeuralScorer tiny_scorer()
{
  return NeuralScorer(NeuralConfig{2, 2, 1, Activation::Tanh}, {"less", "than"}, {Symbol::Sub, Symbol::Con});
}

std::vector<double> tiny_theta(const NeuralScorer& s)
{
  std::vector<double> theta(s.parameter_count());
  for (std::size_t k = 0; k < theta.size(); ++k)
    theta[k] = (static_cast<int>(k % 7) - 3) / 10.0;
  return theta;
}

} // namespace

TEST_CASE("node features of a reordered subtraction")
{
  const auto ctx = less_than_context();
  const std::map<std::string, int> expected{
    {"B|Sub|less|than", 1}, {"L|Sub|Sub", 1},        {"PAT|Sub|BwA", 1},   {"P|Sub|IN", 1},    {"P|Sub|JJR", 1},
    {"UO|Sub|R|less", 1},   {"UO|Sub|R|than", 1},    {"U|Sub|less", 1},    {"U|Sub|than", 1}};
  CHECK(entries(extract_node_features(less_than_tree(), ctx)) == expected);

  const std::map<std::string, int> leaf{{"PAT|CON|w", 1}, {"P|CON|CD", 1}, {"U|CON|<num>", 1}};
  CHECK(entries(extract_node_features(less_than_tree().children[1], ctx)) == leaf);

  // the same words with A before B
  const TextMathTree forward = TextMathTree::binary(Symbol::Sub, WordPattern::from_name("AwB"), {{1, 3}},
                                                    TextMathTree::leaf(NodeKind::con(7), {0, 1}),
                                                    TextMathTree::leaf(NodeKind::con(12), {3, 4}));
  const auto f = extract_node_features(forward, ctx);
  CHECK(f.count("UO|Sub|M|less") == 1);
  CHECK(f.count("UO|Sub|R|less") == 0);
  CHECK(f.count("U|Sub|less") == 1);
}

TEST_CASE("feature template switches")
{
  const auto none = extract_node_features(less_than_tree(), less_than_context({false, false, false}));
  for (const auto& [name, count] : none.entries()) {
    CHECK(name.rfind("P|", 0) != 0);
    CHECK(name.rfind("L|", 0) != 0);
  }
  CHECK(none.size() == 6);

  Tokens x = split("7 less than 12");
  auto q = detect_quantities(x);
  q[0].relevant = true;
  q[1].relevant = false;
  const auto ctx = SentenceContext::make(x, std::nullopt, q, nullptr, {});
  const TextMathTree t = less_than_tree();
  CHECK(extract_node_features(t.children[1], ctx).count("ID|CON|1") == 1);
  CHECK(extract_node_features(t.children[0], ctx).count("ID|CON|0") == 1);
  const auto off = SentenceContext::make(x, std::nullopt, q, nullptr, {true, true, false});
  CHECK(extract_node_features(t.children[1], off).count("ID|CON|1") == 0);
  CHECK_THROWS_AS(SentenceContext::make(x, Tokens{"CD"}, q, nullptr, {}), std::invalid_argument);
}

TEST_CASE("repeated words count twice")
{
  const Tokens x = split("3 and and 4");
  const auto ctx = SentenceContext::make(x, std::nullopt, detect_quantities(x), nullptr, {});
  const TextMathTree t = TextMathTree::binary(Symbol::Add, WordPattern::from_name("AwB"), {{1, 3}},
                                              TextMathTree::leaf(NodeKind::con(3), {0, 1}),
                                              TextMathTree::leaf(NodeKind::con(4), {3, 4}));
  const auto f = extract_node_features(t, ctx);
  CHECK(f.count("U|Add|and") == 2);
  CHECK(f.count("B|Add|and|and") == 1);
}

TEST_CASE("tree features")
{
  const auto f = extract_tree_features(parse_expression("7+(3+6)"));
  CHECK(entries(f) == std::map<std::string, int>{{"T|Add|Add", 1}, {"T|Add|CON", 3}});
  const auto e = extract_tree_features(parse_expression("(3*X1)=((5*X2)-11)"));
  CHECK(entries(e) == std::map<std::string, int>{{"T|Equ|Mul", 1},
                                                  {"T|Equ|Sub", 1},
                                                  {"T|Mul|CON", 2},
                                                  {"T|Mul|VAR", 2},
                                                  {"T|Sub|CON", 1},
                                                  {"T|Sub|Mul", 1}});
  CHECK(extract_tree_features(ExprTree::con(5)).empty());
}

TEST_CASE("global features are the sum of node features and tree features")
{
  oracle::Generator g(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = g.instance(g.uniform(3, 6), g.uniform(1, 2), "d");
    const auto q = detect_quantities(in.text);
    const auto ctx = SentenceContext::make(in.text, std::nullopt, q, &less_than(), {});
    for (const auto& y : oracle::all_expressions(q, TaskConfig())) {
      for (const auto& t : enumerate_joint(in.text, y, q)) {
        FeatureVector sum = extract_tree_features(y);
        std::vector<const TextMathTree*> stack{&t};
        while (!stack.empty()) {
          const TextMathTree* n = stack.back();
          stack.pop_back();
          sum.add(extract_node_features(*n, ctx));
          for (const auto& c : n->children)
            stack.push_back(&c);
        }
        CHECK(sum == extract_features(t, ctx));
      }
    }
  }
}

TEST_CASE("lexicon parsing and matching")
{
  std::istringstream good("# comment\nless than\tSub\n\ntimes\tMul\n");
  const Lexicon lex = Lexicon::parse(good);
  REQUIRE(lex.entries().size() == 2);
  const auto hits = lex.find_all(split("3 times less than 2 times"));
  CHECK(hits.size() == 3);

  std::istringstream bad("less than\tSub\ngreater\tPow\n");
  try {
    Lexicon::parse(bad);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream no_tab("less than Sub\n");
  CHECK_THROWS_AS(Lexicon::parse(no_tab), std::runtime_error);
}

TEST_CASE("segment labels")
{
  for (int label = 0; label < kLabelCount; ++label)
    CHECK(segment_label(label_symbol(label), label_reordered(label)) == label);
  CHECK(segment_label(Symbol::Con, false) == 0);
  CHECK(segment_label(Symbol::Var, false) == 1);

  FeatureIndex index;
  CHECK(index.intern("a") == 0);
  CHECK(index.intern("b") == 1);
  CHECK(index.intern("a") == 0);
  CHECK(index.lookup("c") == -1);
}

TEST_CASE("neural scorer: pinned values on a tiny parameter vector")
{
  const NeuralScorer s = tiny_scorer();
  REQUIRE(s.parameter_count() == 26);
  REQUIRE(s.vocabulary() == std::vector<std::string>{"<pad>", "<unk>", "less", "than"});
  const auto theta = tiny_theta(s);
  // computed by hand-written forward pass outside this code base
  CHECK(s.score(theta, std::vector<int>{0, 2, 3}, Symbol::Sub) == doctest::Approx(-0.050101692522463936).epsilon(1e-12));
  CHECK(s.score(theta, std::vector<int>{2, 3, 0}, Symbol::Con) == doctest::Approx(-0.04381993148327678).epsilon(1e-12));
  CHECK(s.score(theta, std::vector<int>{1, 2, 0}, Symbol::Sub) == doctest::Approx(-0.00966605786497255).epsilon(1e-12));
  CHECK(s.score(theta, std::vector<int>{1, 2, 0}, Symbol::Mul) == 0.0);

  const std::vector<int> sentence = s.word_ids(split("less than"));
  CHECK(s.window(sentence, 0) == std::vector<int>{0, 2, 3});
  const TextMathTree leaf = TextMathTree::leaf(NodeKind::con(5), {0, 2});
  CHECK(neural_tree_score(s, theta, leaf, sentence) == doctest::Approx(-0.06451658145622204).epsilon(1e-12));

  const std::vector<int> four = s.word_ids(split("7 less than 12"));
  CHECK(four == std::vector<int>{1, 2, 3, 1});
  CHECK(neural_tree_score(s, theta, less_than_tree(), four) == doctest::Approx(-0.08068161144814354).epsilon(1e-12));

  const std::vector<double> zero(s.parameter_count(), 0.0);
  CHECK(neural_tree_score(s, zero, less_than_tree(), four) == 0.0);
}

TEST_CASE("neural scorer: backward matches finite differences")
{
  for (Activation act : {Activation::Tanh, Activation::Relu}) {
    const NeuralScorer s(NeuralConfig{3, 4, 1, act}, {"a", "b", "c"}, {Symbol::Add, Symbol::Con, Symbol::Var});
    oracle::Generator g(act == Activation::Tanh ? 1 : 2);
    std::vector<double> theta(s.parameter_count());
    for (auto& v : theta)
      v = g.real(-0.5, 0.5);
    const std::vector<int> sentence{2, 3, 1, 4, 2};
    PsiTable upstream;
    for (auto& row : upstream) {
      row.resize(sentence.size());
      for (auto& v : row)
        v = g.real(-1, 1);
    }
    auto objective = [&](const std::vector<double>& th) {
      const PsiTable psi = s.forward(th, sentence);
      double total = 0;
      for (std::size_t k = 0; k < psi.size(); ++k)
        for (std::size_t t = 0; t < sentence.size(); ++t)
          total += upstream[k][t] * psi[k][t];
      return total;
    };
    std::vector<double> grad(theta.size(), 0.0);
    s.backward(theta, sentence, upstream, grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (objective(up) - objective(down)) / (2 * h);
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}
