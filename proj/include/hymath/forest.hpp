#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include <hymath/expr.hpp>
#include <hymath/tokens.hpp>

namespace hymath {

struct Quantity
{
  std::size_t token = 0;
  Rational value = 0;
  std::optional<bool> relevant;
  std::string surface;
};

/// Rule-based number identification: digit tokens (decimals, thousands
/// separators, fractions "a/b", "$" prefixes, percent suffix or a following
/// "%"/"percent" token divides by 100) and a fixed table of number words.
std::vector<Quantity> detect_quantities(const Tokens& tokens);

/// Grounding rule joining expression leaves to text: a Con leaf needs exactly one
/// quantity token inside the span, with a matching value; a Var leaf needs none.
bool leaf_compat(const NodeKind& leaf, TokenSpan span, const std::vector<Quantity>& quantities);

enum class VarPosition { None, Prefix, Suffix };

std::string to_string(VarPosition position);
VarPosition var_position_from_string(const std::string& text);

struct TaskConfig
{
  std::vector<Symbol> operators{Symbol::Add, Symbol::Sub, Symbol::Mul, Symbol::Div};
  bool inverse_ops = false;
  bool monotone_patterns_only = false;  // with inverse_ops: the 8 A-before-B patterns only
  int max_vars = 0;
  VarPosition var_position = VarPosition::None;
  int max_operator_nodes = -1;  // -1: leaves - 1, the binary-tree maximum
  bool require_all_quantities = false;

  /// Equation parsing: the root is '=' and variables appear inside the sides.
  bool equation_task() const { return max_vars > 0 && var_position == VarPosition::None; }

  /// Operators usable below the root, with SubR/DivR when inverse_ops is set.
  std::vector<Symbol> binary_operators() const;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

class EmptyHypothesisSpace : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class UnreachableGold : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct ForestNode
{
  NodeKind kind;
  int group = -1;
  int quantity = -1;  // Con leaves: index into the quantity list
};

/// Alternatives with the same leaf set. All binary nodes of a group share the
/// split list; a split names the groups supplying the A (left) and B (right) child.
struct ForestGroup
{
  std::uint32_t quantity_mask = 0;
  std::uint32_t var_mask = 0;
  int leaf_count = 0;
  bool root_only = false;
  std::vector<int> nodes;
  std::vector<std::pair<int, int>> splits;
};

/// Packed AND-OR graph whose complete derivations are the candidate expression
/// trees. Groups are stored children-first.
class HypothesisForest
{
public:
  const std::vector<ForestNode>& nodes() const { return nodes_; }
  const std::vector<ForestGroup>& groups() const { return groups_; }
  const std::vector<int>& roots() const { return roots_; }

  bool empty() const { return roots_.empty(); }

  boost::multiprecision::cpp_int derivation_count() const;

  /// Every derivation as an expression tree, in a deterministic order. Throws
  /// std::length_error when more than `cap` trees exist.
  std::vector<ExprTree> derivations(std::size_t cap = 1000000) const;

  /// Derivations of one node.
  std::vector<ExprTree> derivations_of(int node, std::size_t cap = 1000000) const;

  /// Productions (binary node x split, plus leaves) used for logging.
  std::size_t production_count() const;

  // construction interface
  int add_group(ForestGroup group);
  int add_node(ForestNode node);
  void add_root(int node) { roots_.push_back(node); }
  ForestGroup& group(int id) { return groups_[id]; }

  /// Drops groups and nodes unreachable from the roots, keeping order.
  void prune();

private:
  std::vector<ForestNode> nodes_;
  std::vector<ForestGroup> groups_;
  std::vector<int> roots_;
};

/// All candidate trees for an input under the task configuration. Throws
/// EmptyHypothesisSpace when nothing can be built.
HypothesisForest build_forest(const std::vector<Quantity>& quantities, const TaskConfig& config);

/// The single expression y with every grounding of its constants onto
/// quantities of equal value. Throws UnreachableGold when y is outside the
/// space build_forest would produce.
HypothesisForest gold_forest(const ExprTree& gold, const std::vector<Quantity>& quantities, const TaskConfig& config);

/// Applies the task's expression construction to an arithmetic gold tree:
/// wraps it as X1=e / e=X1 for the prefix and suffix variants, and with inverse
/// operators rewrites Sub/Div whose operands appear reversed in the text.
ExprTree adapt_gold(const ExprTree& gold, const std::vector<Quantity>& quantities, const TaskConfig& config);

/// Inverse of the wrapping done by adapt_gold, for scoring answers.
ExprTree strip_answer_variable(const ExprTree& predicted, const TaskConfig& config);

} // namespace hymath
