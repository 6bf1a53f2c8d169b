#include <hymath/forest.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <functional>
#include <map>
#include <unordered_map>

namespace hymath {

using boost::multiprecision::cpp_int;

std::string span_text(const Tokens& tokens, TokenSpan span)
{
  std::string out;
  for (std::size_t i = span.begin; i < span.end && i < tokens.size(); ++i) {
    if (!out.empty())
      out += ' ';
    out += tokens[i];
  }
  return out;
}

namespace {

std::string lowercase(std::string text)
{
  for (auto& c : text)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return text;
}

// "one" and "a" are left out: they are far more often determiners or pronouns
// ("one of the numbers") than quantities.
const std::map<std::string, Rational>& number_words()
{
  static const std::map<std::string, Rational> table = [] {
    std::map<std::string, Rational> t;
    const std::array<const char*, 18> small = {
      "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
      "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
    for (std::size_t i = 0; i < small.size(); ++i)
      t.emplace(small[i], Rational(static_cast<int>(i) + 2));
    const std::array<const char*, 8> tens = {"twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};
    for (std::size_t i = 0; i < tens.size(); ++i)
      t.emplace(tens[i], Rational(static_cast<int>(i + 2) * 10));
    t.emplace("hundred", Rational(100));
    t.emplace("thousand", Rational(1000));
    t.emplace("dozen", Rational(12));
    t.emplace("twice", Rational(2));
    t.emplace("double", Rational(2));
    t.emplace("thrice", Rational(3));
    t.emplace("triple", Rational(3));
    t.emplace("half", Rational(1, 2));
    return t;
  }();
  return table;
}

std::optional<Rational> numeric_token(std::string token, bool& percent)
{
  percent = false;
  if (!token.empty() && token.front() == '$')
    token.erase(0, 1);
  if (!token.empty() && token.back() == '%') {
    token.pop_back();
    percent = true;
  }
  if (token.empty())
    return std::nullopt;
  if (const auto slash = token.find('/'); slash != std::string::npos) {
    const auto num = parse_decimal(token.substr(0, slash));
    const auto den = parse_decimal(token.substr(slash + 1));
    if (num && den && *den != 0)
      return *num / *den;
    return std::nullopt;
  }
  return parse_decimal(token);
}

struct Builder
{
  const std::vector<Quantity>& quantities;
  const TaskConfig& config;
  HypothesisForest forest;
};

} // namespace

std::vector<Quantity> detect_quantities(const Tokens& tokens)
{
  std::vector<Quantity> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bool percent = false;
    std::optional<Rational> value = numeric_token(tokens[i], percent);
    if (!value) {
      const auto& words = number_words();
      if (const auto it = words.find(lowercase(tokens[i])); it != words.end())
        value = it->second;
    }
    if (!value)
      continue;
    if (!percent && i + 1 < tokens.size()) {
      const std::string next = lowercase(tokens[i + 1]);
      percent = next == "%" || next == "percent";
    }
    if (percent)
      *value /= 100;
    out.push_back(Quantity{i, *value, std::nullopt, tokens[i]});
  }
  return out;
}

bool leaf_compat(const NodeKind& leaf, TokenSpan span, const std::vector<Quantity>& quantities)
{
  if (span.size() == 0)
    return false;
  int inside = 0;
  const Quantity* grounded = nullptr;
  for (const auto& q : quantities) {
    if (span.contains(q.token)) {
      ++inside;
      grounded = &q;
    }
  }
  switch (leaf.symbol) {
  case Symbol::Con: return inside == 1 && grounded->value == leaf.value;
  case Symbol::Var: return inside == 0;
  default: return false;
  }
}

std::string to_string(VarPosition position)
{
  switch (position) {
  case VarPosition::Prefix: return "prefix";
  case VarPosition::Suffix: return "suffix";
  default: return "none";
  }
}

VarPosition var_position_from_string(const std::string& text)
{
  if (text == "none")
    return VarPosition::None;
  if (text == "prefix")
    return VarPosition::Prefix;
  if (text == "suffix")
    return VarPosition::Suffix;
  throw std::invalid_argument("unknown variable position '" + text + "'");
}

std::vector<Symbol> TaskConfig::binary_operators() const
{
  std::vector<Symbol> out = operators;
  if (inverse_ops) {
    if (std::find(out.begin(), out.end(), Symbol::Sub) != out.end())
      out.push_back(Symbol::SubR);
    if (std::find(out.begin(), out.end(), Symbol::Div) != out.end())
      out.push_back(Symbol::DivR);
  }
  return out;
}

void TaskConfig::validate() const
{
  if (operators.empty())
    throw std::invalid_argument("operator set is empty");
  for (Symbol s : operators)
    if (s != Symbol::Add && s != Symbol::Sub && s != Symbol::Mul && s != Symbol::Div)
      throw std::invalid_argument("operator set may contain only Add, Sub, Mul, Div");
  if (max_vars < 0 || max_vars > 2)
    throw std::invalid_argument("max_vars must be in [0, 2]");
  if (max_vars > 0 && var_position != VarPosition::None)
    throw std::invalid_argument("max_vars and a variable position are exclusive");
  if (monotone_patterns_only && !inverse_ops)
    throw std::invalid_argument("monotone-only patterns require inverse operators");
  if (max_operator_nodes < -1)
    throw std::invalid_argument("max_operator_nodes must be -1 or non-negative");
}

int HypothesisForest::add_group(ForestGroup group)
{
  groups_.push_back(std::move(group));
  return static_cast<int>(groups_.size()) - 1;
}

int HypothesisForest::add_node(ForestNode node)
{
  const int id = static_cast<int>(nodes_.size());
  groups_.at(node.group).nodes.push_back(id);
  nodes_.push_back(std::move(node));
  return id;
}

void HypothesisForest::prune()
{
  std::vector<char> live(groups_.size(), 0);
  for (int r : roots_)
    live[nodes_[r].group] = 1;
  for (int g = static_cast<int>(groups_.size()) - 1; g >= 0; --g) {
    if (!live[g])
      continue;
    for (const auto& [l, r] : groups_[g].splits)
      live[l] = live[r] = 1;
  }

  std::vector<int> group_map(groups_.size(), -1);
  std::vector<int> node_map(nodes_.size(), -1);
  std::vector<ForestGroup> groups;
  std::vector<ForestNode> nodes;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (!live[g])
      continue;
    group_map[g] = static_cast<int>(groups.size());
    ForestGroup copy = groups_[g];
    copy.nodes.clear();
    for (int n : groups_[g].nodes) {
      node_map[n] = static_cast<int>(nodes.size());
      ForestNode node = nodes_[n];
      node.group = group_map[g];
      nodes.push_back(std::move(node));
      copy.nodes.push_back(node_map[n]);
    }
    for (auto& [l, r] : copy.splits) {
      l = group_map[l];
      r = group_map[r];
    }
    groups.push_back(std::move(copy));
  }
  for (int& r : roots_)
    r = node_map[r];
  groups_ = std::move(groups);
  nodes_ = std::move(nodes);
}

cpp_int HypothesisForest::derivation_count() const
{
  std::vector<cpp_int> per_node(nodes_.size(), 0);
  std::vector<cpp_int> per_group(groups_.size(), 0);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& group = groups_[g];
    for (int n : group.nodes) {
      if (nodes_[n].kind.arity() == 0) {
        per_node[n] = 1;
      } else {
        cpp_int total = 0;
        for (const auto& [l, r] : group.splits)
          total += per_group[l] * per_group[r];
        per_node[n] = total;
      }
      per_group[g] += per_node[n];
    }
  }
  cpp_int total = 0;
  for (int r : roots_)
    total += per_node[r];
  return total;
}

std::vector<ExprTree> HypothesisForest::derivations_of(int node, std::size_t cap) const
{
  std::map<int, std::vector<ExprTree>> memo;
  std::function<const std::vector<ExprTree>&(int)> expand = [&](int n) -> const std::vector<ExprTree>& {
    if (auto it = memo.find(n); it != memo.end())
      return it->second;
    std::vector<ExprTree> out;
    const ForestNode& fn = nodes_[n];
    if (fn.kind.arity() == 0) {
      out.emplace_back(fn.kind);
    } else {
      for (const auto& [l, r] : groups_[fn.group].splits) {
        for (int cl : groups_[l].nodes) {
          const auto& lefts = expand(cl);
          for (int cr : groups_[r].nodes) {
            const auto& rights = expand(cr);
            for (const auto& a : lefts) {
              for (const auto& b : rights) {
                if (out.size() >= cap)
                  throw std::length_error("derivation cap exceeded");
                out.push_back(ExprTree::binary(fn.kind.symbol, a, b));
              }
            }
          }
        }
      }
    }
    return memo.emplace(n, std::move(out)).first->second;
  };
  return expand(node);
}

std::vector<ExprTree> HypothesisForest::derivations(std::size_t cap) const
{
  std::vector<ExprTree> out;
  for (int r : roots_) {
    auto part = derivations_of(r, cap);
    if (out.size() + part.size() > cap)
      throw std::length_error("derivation cap exceeded");
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

std::size_t HypothesisForest::production_count() const
{
  std::size_t total = 0;
  for (const auto& node : nodes_)
    total += node.kind.arity() == 0 ? 1 : groups_[node.group].splits.size();
  return total;
}

namespace {

int leaf_limit(const std::vector<Quantity>& quantities, const TaskConfig& config)
{
  const int vars = config.equation_task() ? config.max_vars : (config.var_position != VarPosition::None ? 1 : 0);
  const int available = static_cast<int>(quantities.size()) + vars;
  const int max_ops = config.max_operator_nodes < 0 ? std::max(0, available - 1) : config.max_operator_nodes;
  return max_ops + 1;
}

bool is_prefix_set(std::uint32_t var_mask)
{
  return var_mask != 0 && (var_mask & (var_mask + 1)) == 0;
}

} // namespace

HypothesisForest build_forest(const std::vector<Quantity>& quantities, const TaskConfig& config)
{
  config.validate();
  const int q_count = static_cast<int>(quantities.size());
  const int v_count = config.equation_task() ? config.max_vars : 0;
  const bool wrapped = config.var_position != VarPosition::None;
  if (q_count + v_count > 20)
    throw std::invalid_argument("too many quantities for the hypothesis forest");

  const int max_leaves = leaf_limit(quantities, config);
  const int child_limit = (wrapped || config.equation_task()) ? max_leaves - 1 : max_leaves;
  const std::uint32_t full_q = q_count == 32 ? ~0u : ((1u << q_count) - 1);
  const std::uint32_t bits = static_cast<std::uint32_t>(q_count + v_count);
  const auto ops = config.binary_operators();

  HypothesisForest forest;
  std::unordered_map<std::uint32_t, int> group_of;  // combined leaf mask -> group

  for (int size = 1; size <= std::min<int>(bits, child_limit); ++size) {
    for (std::uint32_t mask = 1; mask < (1u << bits); ++mask) {
      if (std::popcount(mask) != size)
        continue;
      ForestGroup group;
      group.quantity_mask = mask & full_q;
      group.var_mask = mask >> q_count;
      group.leaf_count = size;
      if (size >= 2) {
        for (std::uint32_t sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask)
          group.splits.emplace_back(group_of.at(sub), group_of.at(mask ^ sub));
        std::reverse(group.splits.begin(), group.splits.end());
      }
      const int g = forest.add_group(std::move(group));
      group_of.emplace(mask, g);
      if (size == 1) {
        const int bit = std::countr_zero(mask);
        if (bit < q_count)
          forest.add_node(ForestNode{NodeKind::con(quantities[bit].value), g, bit});
        else
          forest.add_node(ForestNode{NodeKind::variable(bit - q_count + 1), g, -1});
      } else {
        for (Symbol op : ops)
          forest.add_node(ForestNode{NodeKind::op(op), g, -1});
      }
    }
  }

  if (wrapped) {
    ForestGroup x_group;
    x_group.var_mask = 1;
    x_group.leaf_count = 1;
    const int xg = forest.add_group(std::move(x_group));
    forest.add_node(ForestNode{NodeKind::variable(1), xg, -1});
    const std::size_t ordinary = forest.groups().size() - 1;
    for (std::size_t g = 0; g < ordinary; ++g) {
      const auto& child = forest.groups()[g];
      if (child.var_mask != 0 || child.leaf_count + 1 > max_leaves)
        continue;
      if (config.require_all_quantities && child.quantity_mask != full_q)
        continue;
      ForestGroup root;
      root.quantity_mask = child.quantity_mask;
      root.var_mask = 1;
      root.leaf_count = child.leaf_count + 1;
      root.root_only = true;
      if (config.var_position == VarPosition::Prefix)
        root.splits.emplace_back(xg, static_cast<int>(g));
      else
        root.splits.emplace_back(static_cast<int>(g), xg);
      const int rg = forest.add_group(std::move(root));
      forest.add_root(forest.add_node(ForestNode{NodeKind::op(Symbol::Equ), rg, -1}));
    }
  } else if (config.equation_task()) {
    for (std::uint32_t mask = 1; mask < (1u << bits); ++mask) {
      const int size = std::popcount(mask);
      const std::uint32_t qm = mask & full_q;
      const std::uint32_t vm = mask >> q_count;
      if (size < 2 || qm == 0 || size > max_leaves || !is_prefix_set(vm))
        continue;
      if (config.require_all_quantities && qm != full_q)
        continue;
      ForestGroup root;
      root.quantity_mask = qm;
      root.var_mask = vm;
      root.leaf_count = size;
      root.root_only = true;
      for (std::uint32_t sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask)
        root.splits.emplace_back(group_of.at(sub), group_of.at(mask ^ sub));
      std::reverse(root.splits.begin(), root.splits.end());
      const int rg = forest.add_group(std::move(root));
      forest.add_root(forest.add_node(ForestNode{NodeKind::op(Symbol::Equ), rg, -1}));
    }
  } else {
    for (std::size_t g = 0; g < forest.groups().size(); ++g) {
      const auto& group = forest.groups()[g];
      if (config.require_all_quantities && group.quantity_mask != full_q)
        continue;
      for (int n : group.nodes)
        forest.add_root(n);
    }
  }

  if (forest.roots().empty())
    throw EmptyHypothesisSpace("no candidate expression under the task configuration");
  forest.prune();
  return forest;
}

namespace {

void check_gold_shape(const ExprTree& gold, const std::vector<Quantity>& quantities, const TaskConfig& config)
{
  const auto ops = config.binary_operators();
  std::vector<int> var_uses(3, 0);
  std::function<void(const ExprTree&, bool)> walk = [&](const ExprTree& t, bool root) {
    const Symbol s = t.symbol();
    if (s == Symbol::Equ) {
      if (!root || (!config.equation_task() && config.var_position == VarPosition::None))
        throw UnreachableGold("equation sign not allowed here: " + serialize(gold));
    } else if (s == Symbol::Var) {
      if (t.kind().var > 2)
        throw UnreachableGold("variable index out of range: " + serialize(gold));
      ++var_uses[t.kind().var];
    } else if (s != Symbol::Con && std::find(ops.begin(), ops.end(), s) == ops.end()) {
      throw UnreachableGold("operator " + std::string(symbol_name(s)) + " not in the operator set");
    }
    for (const auto& c : t.children())
      walk(c, false);
  };
  walk(gold, true);

  const int leaves = static_cast<int>(gold.leaves().size());
  if (leaves > leaf_limit(quantities, config))
    throw UnreachableGold("expression exceeds the operator-node limit");

  if (config.var_position != VarPosition::None) {
    if (gold.symbol() != Symbol::Equ)
      throw UnreachableGold("expected an X-wrapped equation");
    const bool prefix = config.var_position == VarPosition::Prefix;
    const ExprTree& x = prefix ? gold.left() : gold.right();
    const ExprTree& e = prefix ? gold.right() : gold.left();
    if (x.symbol() != Symbol::Var || x.kind().var != 1 || e.contains(Symbol::Var))
      throw UnreachableGold("X-wrapped equation has the wrong shape");
  } else if (config.equation_task()) {
    if (gold.symbol() != Symbol::Equ)
      throw UnreachableGold("equation task needs an equation");
    if (var_uses[1] > 1 || var_uses[2] > 1)
      throw UnreachableGold("a variable is used twice");
    if (var_uses[1] == 0 || (var_uses[2] > 0 && config.max_vars < 2))
      throw UnreachableGold("variables must be X1 or X1, X2 within max_vars");
  } else if (gold.contains(Symbol::Var)) {
    throw UnreachableGold("arithmetic task has no variables");
  }
}

} // namespace

HypothesisForest gold_forest(const ExprTree& gold, const std::vector<Quantity>& quantities, const TaskConfig& config)
{
  config.validate();
  check_gold_shape(gold, quantities, config);

  HypothesisForest forest;
  const std::uint32_t full_q = (1u << quantities.size()) - 1;

  // groups per (subtree, quantity mask)
  std::function<std::vector<int>(const ExprTree&, bool)> build = [&](const ExprTree& t, bool root) {
    std::vector<int> out;
    if (t.symbol() == Symbol::Con) {
      for (std::size_t q = 0; q < quantities.size(); ++q) {
        if (quantities[q].value != t.kind().value)
          continue;
        ForestGroup g;
        g.quantity_mask = 1u << q;
        g.leaf_count = 1;
        const int id = forest.add_group(std::move(g));
        forest.add_node(ForestNode{t.kind(), id, static_cast<int>(q)});
        out.push_back(id);
      }
      return out;
    }
    if (t.symbol() == Symbol::Var) {
      ForestGroup g;
      g.var_mask = 1u << (t.kind().var - 1);
      g.leaf_count = 1;
      const int id = forest.add_group(std::move(g));
      forest.add_node(ForestNode{t.kind(), id, -1});
      out.push_back(id);
      return out;
    }
    const auto lefts = build(t.left(), false);
    const auto rights = build(t.right(), false);
    std::map<std::uint32_t, ForestGroup> by_mask;
    for (int l : lefts) {
      for (int r : rights) {
        const auto& gl = forest.groups()[l];
        const auto& gr = forest.groups()[r];
        if ((gl.quantity_mask & gr.quantity_mask) != 0 || (gl.var_mask & gr.var_mask) != 0)
          continue;
        auto& g = by_mask[gl.quantity_mask | gr.quantity_mask];
        g.quantity_mask = gl.quantity_mask | gr.quantity_mask;
        g.var_mask = gl.var_mask | gr.var_mask;
        g.leaf_count = gl.leaf_count + gr.leaf_count;
        g.root_only = root && t.symbol() == Symbol::Equ;
        g.splits.emplace_back(l, r);
      }
    }
    for (auto& [mask, g] : by_mask) {
      const int id = forest.add_group(std::move(g));
      forest.add_node(ForestNode{t.kind(), id, -1});
      out.push_back(id);
    }
    return out;
  };

  for (int g : build(gold, true)) {
    if (config.require_all_quantities && forest.groups()[g].quantity_mask != full_q)
      continue;
    forest.add_root(forest.groups()[g].nodes.front());
  }
  if (forest.roots().empty())
    throw UnreachableGold("gold constants cannot be grounded in the text: " + serialize(gold));
  forest.prune();
  return forest;
}

ExprTree adapt_gold(const ExprTree& gold, const std::vector<Quantity>& quantities, const TaskConfig& config)
{
  ExprTree out = gold;

  if (config.inverse_ops) {
    // ground constants greedily in leaf order to find where each operand is mentioned
    std::vector<char> used(quantities.size(), 0);
    std::function<ExprTree(const ExprTree&, std::optional<std::size_t>&)> rewrite =
      [&](const ExprTree& t, std::optional<std::size_t>& first) -> ExprTree {
      if (t.symbol() == Symbol::Con) {
        for (std::size_t q = 0; q < quantities.size(); ++q) {
          if (!used[q] && quantities[q].value == t.kind().value) {
            used[q] = 1;
            first = quantities[q].token;
            break;
          }
        }
        return t;
      }
      if (t.is_leaf())
        return t;
      std::optional<std::size_t> lf, rf;
      ExprTree l = rewrite(t.left(), lf);
      ExprTree r = rewrite(t.right(), rf);
      if (lf && rf)
        first = std::min(*lf, *rf);
      else
        first = lf ? lf : rf;
      Symbol s = t.symbol();
      if (lf && rf && *lf > *rf && (s == Symbol::Sub || s == Symbol::Div))
        return ExprTree::binary(s == Symbol::Sub ? Symbol::SubR : Symbol::DivR, std::move(r), std::move(l));
      return ExprTree::binary(s, std::move(l), std::move(r));
    };
    std::optional<std::size_t> ignored;
    out = rewrite(out, ignored);
  }

  if (config.var_position != VarPosition::None && out.symbol() != Symbol::Equ) {
    if (config.var_position == VarPosition::Prefix)
      out = ExprTree::binary(Symbol::Equ, ExprTree::var(1), std::move(out));
    else
      out = ExprTree::binary(Symbol::Equ, std::move(out), ExprTree::var(1));
  }
  return out;
}

ExprTree strip_answer_variable(const ExprTree& predicted, const TaskConfig& config)
{
  if (config.var_position == VarPosition::None || predicted.symbol() != Symbol::Equ)
    return predicted;
  if (predicted.left().symbol() == Symbol::Var)
    return predicted.right();
  if (predicted.right().symbol() == Symbol::Var)
    return predicted.left();
  return predicted;
}

} // namespace hymath
