#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <hymath/expr.hpp>
#include <hymath/forest.hpp>
#include <hymath/pattern.hpp>
#include <hymath/tokens.hpp>

namespace hymath {

/// One node of a joint text-math tree: an expression node, its word association
/// pattern, the token span of each w element (in pattern order), and its
/// children (A = children[0], B = children[1]).
struct TextMathTree
{
  NodeKind kind;
  WordPattern pattern;
  std::vector<TokenSpan> segments;
  std::vector<TextMathTree> children;

  static TextMathTree leaf(NodeKind kind, TokenSpan span);
  static TextMathTree binary(Symbol op, WordPattern pattern, std::vector<TokenSpan> segments,
                             TextMathTree a, TextMathTree b);

  bool operator==(const TextMathTree&) const = default;
};

class MalformedTree : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Token positions produced by rewriting A/B with child yields and w with the
/// covered tokens. Throws MalformedTree on shape errors or overlapping spans.
std::vector<std::size_t> yield_positions(const TextMathTree& tree);

/// Words of yield_positions.
Tokens yield_text(const TextMathTree& tree, const Tokens& tokens);

ExprTree yield_expr(const TextMathTree& tree);

/// Valid iff the expression yield is y, the rewritten text is exactly positions
/// 0..n-1 of x in order, and every leaf satisfies quantity grounding.
bool is_valid(const TextMathTree& tree, const Tokens& x, const ExprTree& y, const std::vector<Quantity>& quantities);

class EnumerationCapExceeded : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Every valid tree for (x, y), built constructively. Inputs longer than 12
/// tokens are rejected unless a cap is given. Throws EnumerationCapExceeded
/// when more than `cap` trees exist; an empty result means no valid tree.
std::vector<TextMathTree> enumerate_joint(const Tokens& x, const ExprTree& y, const std::vector<Quantity>& quantities,
                                          std::optional<std::size_t> cap = std::nullopt,
                                          const PatternSet& patterns = PatternSet());

/// Indented debug dump, one node per line: `KIND pattern {span} {span}`.
std::string dump(const TextMathTree& tree, const Tokens& tokens);

} // namespace hymath
