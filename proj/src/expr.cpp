#include <hymath/expr.hpp>
#include <hymath/polynomial.hpp>

#include <array>
#include <cctype>

namespace hymath {

namespace {

constexpr std::array<std::string_view, kSymbolCount> kSymbolNames = {
  "Equ", "Add", "Sub", "Mul", "Div", "SubR", "DivR", "CON", "VAR"};

std::string_view infix_sign(Symbol symbol)
{
  switch (symbol) {
  case Symbol::Equ: return "=";
  case Symbol::Add: return "+";
  case Symbol::Sub: return "-";
  case Symbol::Mul: return "*";
  case Symbol::Div: return "/";
  case Symbol::SubR: return "-r";
  case Symbol::DivR: return "/r";
  default: return "";
  }
}

class Parser
{
public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprTree parse()
  {
    ExprTree tree = parse_equation();
    skip_space();
    if (pos_ != text_.size()) {
      if (text_[pos_] == '=')
        throw ExprError("more than one '='", pos_);
      throw ExprError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    }
    return tree;
  }

private:
  ExprTree parse_equation()
  {
    ExprTree lhs = parse_additive();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '=') {
      const std::size_t at = pos_++;
      if (lhs.symbol() == Symbol::Equ)
        throw ExprError("more than one '='", at);
      ExprTree rhs = parse_additive();
      if (rhs.symbol() == Symbol::Equ)
        throw ExprError("more than one '='", at);
      return ExprTree::binary(Symbol::Equ, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprTree parse_additive()
  {
    ExprTree tree = parse_multiplicative();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      Symbol op;
      if (match("-r"))
        op = Symbol::SubR;
      else if (match("+"))
        op = Symbol::Add;
      else if (match("-") || match("\xE2\x88\x92"))  // U+2212
        op = Symbol::Sub;
      else
        return tree;
      ExprTree rhs = parse_multiplicative();
      tree = combine(op, std::move(tree), std::move(rhs), at);
    }
  }

  ExprTree parse_multiplicative()
  {
    ExprTree tree = parse_primary();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      Symbol op;
      if (match("/r"))
        op = Symbol::DivR;
      else if (match("*") || match("\xC3\x97"))  // U+00D7
        op = Symbol::Mul;
      else if (match("/") || match("\xC3\xB7"))  // U+00F7
        op = Symbol::Div;
      else
        return tree;
      ExprTree rhs = parse_primary();
      tree = combine(op, std::move(tree), std::move(rhs), at);
    }
  }

  ExprTree parse_primary()
  {
    skip_space();
    if (pos_ >= text_.size())
      throw ExprError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprTree inner = parse_equation();
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != ')')
        throw ExprError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (c == '[') {
      const std::size_t start = pos_;
      const auto close = text_.find(']', pos_);
      if (close == std::string_view::npos)
        throw ExprError("unterminated rational literal", start);
      const std::string_view body = text_.substr(pos_ + 1, close - pos_ - 1);
      const auto slash = body.find('/');
      if (slash == std::string_view::npos)
        throw ExprError("malformed rational literal", start);
      const auto num = parse_decimal(body.substr(0, slash));
      const auto den = parse_decimal(body.substr(slash + 1));
      if (!num || !den || *den == 0)
        throw ExprError("malformed rational literal", start);
      pos_ = close + 1;
      return ExprTree::con(*num / *den);
    }
    if (c == 'X' || c == 'x') {
      const std::size_t start = pos_++;
      std::size_t end = pos_;
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end])))
        ++end;
      if (end == pos_)
        throw ExprError("variable needs an index", start);
      const int index = std::stoi(std::string(text_.substr(pos_, end - pos_)));
      if (index < 1)
        throw ExprError("variable index must be positive", start);
      pos_ = end;
      return ExprTree::var(index);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      std::size_t end = pos_;
      while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
        ++end;
      const auto value = parse_decimal(text_.substr(start, end - start));
      if (!value)
        throw ExprError("malformed number", start);
      pos_ = end;
      return ExprTree::con(*value);
    }
    throw ExprError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  static ExprTree combine(Symbol op, ExprTree lhs, ExprTree rhs, std::size_t at)
  {
    if (lhs.symbol() == Symbol::Equ || rhs.symbol() == Symbol::Equ)
      throw ExprError("'=' below an operator", at);
    return ExprTree::binary(op, std::move(lhs), std::move(rhs));
  }

  bool match(std::string_view token)
  {
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void skip_space()
  {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void serialize_into(const ExprTree& tree, std::string& out)
{
  switch (tree.symbol()) {
  case Symbol::Con:
    if (is_terminating(tree.kind().value))
      out += format_rational(tree.kind().value);
    else
      out += "[" + format_rational(tree.kind().value) + "]";
    return;
  case Symbol::Var:
    out += "X" + std::to_string(tree.kind().var);
    return;
  default:
    out += '(';
    serialize_into(tree.left(), out);
    out += infix_sign(tree.symbol());
    serialize_into(tree.right(), out);
    out += ')';
  }
}

} // namespace

int arity(Symbol symbol)
{
  return is_operator(symbol) ? 2 : 0;
}

bool is_operator(Symbol symbol)
{
  return symbol != Symbol::Con && symbol != Symbol::Var;
}

std::string_view symbol_name(Symbol symbol)
{
  return kSymbolNames[static_cast<std::size_t>(symbol)];
}

Symbol symbol_from_name(std::string_view name)
{
  for (int i = 0; i < kSymbolCount; ++i)
    if (kSymbolNames[i] == name)
      return static_cast<Symbol>(i);
  throw std::invalid_argument("unknown symbol '" + std::string(name) + "'");
}

NodeKind NodeKind::op(Symbol symbol)
{
  if (!is_operator(symbol))
    throw std::invalid_argument("NodeKind::op needs an operator symbol");
  return NodeKind{symbol, 0, 0};
}

NodeKind NodeKind::con(Rational value)
{
  return NodeKind{Symbol::Con, std::move(value), 0};
}

NodeKind NodeKind::variable(int index)
{
  if (index < 1)
    throw std::invalid_argument("variable index must be positive");
  return NodeKind{Symbol::Var, 0, index};
}

std::string NodeKind::label() const
{
  switch (symbol) {
  case Symbol::Con: return "Con(" + format_rational(value) + ")";
  case Symbol::Var: return "Var(X" + std::to_string(var) + ")";
  default: return std::string(symbol_name(symbol));
  }
}

ExprTree::ExprTree(NodeKind kind, std::vector<ExprTree> children)
  : kind_(std::move(kind)), children_(std::move(children))
{
  if (static_cast<int>(children_.size()) != kind_.arity())
    throw ExprError("node " + kind_.label() + " expects " + std::to_string(kind_.arity()) + " children");
  for (const auto& child : children_)
    if (child.symbol() == Symbol::Equ)
      throw ExprError("'=' below an operator");
}

ExprTree ExprTree::binary(Symbol op, ExprTree left, ExprTree right)
{
  std::vector<ExprTree> children;
  children.reserve(2);
  children.push_back(std::move(left));
  children.push_back(std::move(right));
  return ExprTree(NodeKind::op(op), std::move(children));
}

std::size_t ExprTree::node_count() const
{
  std::size_t n = 1;
  for (const auto& c : children_)
    n += c.node_count();
  return n;
}

std::size_t ExprTree::operator_count() const
{
  std::size_t n = is_leaf() ? 0 : 1;
  for (const auto& c : children_)
    n += c.operator_count();
  return n;
}

bool ExprTree::contains(Symbol symbol) const
{
  if (kind_.symbol == symbol)
    return true;
  for (const auto& c : children_)
    if (c.contains(symbol))
      return true;
  return false;
}

std::vector<NodeKind> ExprTree::leaves() const
{
  if (is_leaf())
    return {kind_};
  std::vector<NodeKind> out = left().leaves();
  auto rest = right().leaves();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

ExprTree parse_expression(std::string_view text)
{
  return Parser(text).parse();
}

std::string serialize(const ExprTree& tree)
{
  std::string out;
  serialize_into(tree, out);
  return out;
}

Rational evaluate(const ExprTree& tree)
{
  switch (tree.symbol()) {
  case Symbol::Con: return tree.kind().value;
  case Symbol::Var: throw EvalError("cannot evaluate a variable");
  case Symbol::Equ: throw EvalError("cannot evaluate an equation");
  default: break;
  }
  Rational a = evaluate(tree.left());
  Rational b = evaluate(tree.right());
  switch (tree.symbol()) {
  case Symbol::Add: return a + b;
  case Symbol::Sub: return a - b;
  case Symbol::SubR: return b - a;
  case Symbol::Mul: return a * b;
  case Symbol::Div:
    if (b == 0)
      throw EvalError("division by zero");
    return a / b;
  case Symbol::DivR:
    if (a == 0)
      throw EvalError("division by zero");
    return b / a;
  default:
    throw EvalError("unexpected symbol");
  }
}

bool equivalent(const ExprTree& a, const ExprTree& b)
{
  const bool a_eq = a.symbol() == Symbol::Equ;
  const bool b_eq = b.symbol() == Symbol::Equ;
  if (a_eq != b_eq)
    return false;
  try {
    if (!a_eq) {
      if (!a.contains(Symbol::Var) && !b.contains(Symbol::Var))
        return evaluate(a) == evaluate(b);
      const RationalFunction fa = to_rational_function(a);
      const RationalFunction fb = to_rational_function(b);
      return fa.numerator * fb.denominator == fb.numerator * fa.denominator;
    }
    const auto residual = [](const ExprTree& eq) {
      const RationalFunction lhs = to_rational_function(eq.left());
      const RationalFunction rhs = to_rational_function(eq.right());
      return lhs.numerator * rhs.denominator - rhs.numerator * lhs.denominator;
    };
    return residual(a).proportional_to(residual(b));
  } catch (const EvalError&) {
    return false;
  }
}

} // namespace hymath
