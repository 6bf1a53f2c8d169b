#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <hymath/rational.hpp>

namespace hymath {

// Expression tree node symbols. SubR/DivR are the inverse operators, used only
// when the inverse-operator variant is enabled: SubR(a,b) = b - a.
enum class Symbol : std::uint8_t { Equ, Add, Sub, Mul, Div, SubR, DivR, Con, Var };

inline constexpr int kSymbolCount = 9;
inline constexpr int kOperatorCount = 7;  // Equ..DivR occupy the first seven slots

int arity(Symbol symbol);
bool is_operator(Symbol symbol);

/// Abstract feature name: operators by name, every constant "CON", every variable "VAR".
std::string_view symbol_name(Symbol symbol);
Symbol symbol_from_name(std::string_view name);

struct NodeKind
{
  Symbol symbol = Symbol::Con;
  Rational value = 0;  // Con only
  int var = 0;         // Var only, 1-based

  static NodeKind op(Symbol symbol);
  static NodeKind con(Rational value);
  static NodeKind variable(int index);

  int arity() const { return hymath::arity(symbol); }

  /// "Add", "Con(7)", "Var(X1)".
  std::string label() const;

  bool operator==(const NodeKind&) const = default;
};

class ExprError : public std::runtime_error
{
public:
  ExprError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)), position_(position) {}
  explicit ExprError(const std::string& message) : std::runtime_error(message), position_(0) {}

  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class EvalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ExprTree
{
public:
  /// Checks arity and that Equ never appears below another node.
  ExprTree(NodeKind kind, std::vector<ExprTree> children = {});

  static ExprTree con(Rational value) { return ExprTree(NodeKind::con(std::move(value))); }
  static ExprTree var(int index) { return ExprTree(NodeKind::variable(index)); }
  static ExprTree binary(Symbol op, ExprTree left, ExprTree right);

  const NodeKind& kind() const { return kind_; }
  Symbol symbol() const { return kind_.symbol; }
  const std::vector<ExprTree>& children() const { return children_; }
  const ExprTree& left() const { return children_.at(0); }
  const ExprTree& right() const { return children_.at(1); }
  bool is_leaf() const { return children_.empty(); }

  std::size_t node_count() const;
  std::size_t operator_count() const;
  bool contains(Symbol symbol) const;

  /// Leaves in left-to-right order.
  std::vector<NodeKind> leaves() const;

  bool operator==(const ExprTree&) const = default;

private:
  NodeKind kind_;
  std::vector<ExprTree> children_;
};

/// Infix grammar: optional single top-level '=', binary + - * / (also the unicode
/// signs), '-r' and '/r' for the inverse operators, parentheses, decimals,
/// variables X1, X2, ..., and bracketed rationals "[1/3]".
ExprTree parse_expression(std::string_view text);

/// Fully parenthesized canonical infix; parse_expression(serialize(t)) == t.
std::string serialize(const ExprTree& tree);

/// Exact value of a constant expression. Throws EvalError on division by zero or
/// when the tree contains Var or Equ.
Rational evaluate(const ExprTree& tree);

/// Mathematical equivalence. Constant expressions compare by value; equations
/// compare lhs - rhs as rational functions up to a nonzero scalar. Variables are
/// never renamed. Division by zero makes the pair non-equivalent.
bool equivalent(const ExprTree& a, const ExprTree& b);

} // namespace hymath
