#include <hymath/hybrid_tree.hpp>

#include <functional>
#include <map>
#include <tuple>

namespace hymath {

TextMathTree TextMathTree::leaf(NodeKind kind, TokenSpan span)
{
  return TextMathTree{std::move(kind), WordPattern({PatternElement::W}), {span}, {}};
}

TextMathTree TextMathTree::binary(Symbol op, WordPattern pattern, std::vector<TokenSpan> segments,
                                  TextMathTree a, TextMathTree b)
{
  TextMathTree t{NodeKind::op(op), std::move(pattern), std::move(segments), {}};
  t.children.push_back(std::move(a));
  t.children.push_back(std::move(b));
  return t;
}

namespace {

void collect_positions(const TextMathTree& tree, std::vector<std::size_t>& out)
{
  if (tree.kind.arity() != tree.pattern.arity())
    throw MalformedTree("pattern " + tree.pattern.name() + " does not fit node " + tree.kind.label());
  if (static_cast<int>(tree.children.size()) != tree.kind.arity())
    throw MalformedTree("wrong child count at " + tree.kind.label());
  if (static_cast<int>(tree.segments.size()) != tree.pattern.word_slots())
    throw MalformedTree("segment count does not match pattern at " + tree.kind.label());

  std::size_t segment = 0;
  for (PatternElement e : tree.pattern.elements()) {
    switch (e) {
    case PatternElement::W: {
      const TokenSpan span = tree.segments[segment++];
      if (span.size() == 0)
        throw MalformedTree("empty word segment at " + tree.kind.label());
      for (std::size_t i = span.begin; i < span.end; ++i)
        out.push_back(i);
      break;
    }
    case PatternElement::A: collect_positions(tree.children[0], out); break;
    case PatternElement::B: collect_positions(tree.children[1], out); break;
    }
  }
}

} // namespace

std::vector<std::size_t> yield_positions(const TextMathTree& tree)
{
  std::vector<std::size_t> out;
  collect_positions(tree, out);
  std::vector<char> seen;
  for (std::size_t p : out) {
    if (p >= seen.size())
      seen.resize(p + 1, 0);
    if (seen[p])
      throw MalformedTree("overlapping spans at token " + std::to_string(p));
    seen[p] = 1;
  }
  return out;
}

Tokens yield_text(const TextMathTree& tree, const Tokens& tokens)
{
  Tokens out;
  for (std::size_t p : yield_positions(tree))
    out.push_back(tokens.at(p));
  return out;
}

ExprTree yield_expr(const TextMathTree& tree)
{
  std::vector<ExprTree> children;
  for (const auto& c : tree.children)
    children.push_back(yield_expr(c));
  return ExprTree(tree.kind, std::move(children));
}

bool is_valid(const TextMathTree& tree, const Tokens& x, const ExprTree& y, const std::vector<Quantity>& quantities)
{
  try {
    const auto positions = yield_positions(tree);
    if (positions.size() != x.size())
      return false;
    for (std::size_t i = 0; i < positions.size(); ++i)
      if (positions[i] != i)
        return false;
    if (!(yield_expr(tree) == y))
      return false;
  } catch (const std::exception&) {
    return false;
  }

  std::function<bool(const TextMathTree&)> grounded = [&](const TextMathTree& t) {
    if (t.kind.arity() == 0)
      return leaf_compat(t.kind, t.segments.front(), quantities);
    for (const auto& c : t.children)
      if (!grounded(c))
        return false;
    return true;
  };
  return grounded(tree);
}

namespace {

class JointEnumerator
{
public:
  JointEnumerator(const std::vector<Quantity>& quantities, std::size_t cap, const PatternSet& patterns)
    : quantities_(quantities), cap_(cap), patterns_(patterns) {}

  const std::vector<TextMathTree>& trees(const ExprTree& y, std::size_t begin, std::size_t end)
  {
    const auto key = std::make_tuple(&y, begin, end);
    if (auto it = memo_.find(key); it != memo_.end())
      return it->second;

    std::vector<TextMathTree> out;
    if (y.is_leaf()) {
      if (leaf_compat(y.kind(), TokenSpan{begin, end}, quantities_))
        out.push_back(TextMathTree::leaf(y.kind(), TokenSpan{begin, end}));
    } else {
      for (const auto& pattern : patterns_.patterns())
        place(y, pattern, 0, begin, end, {}, nullptr, nullptr, out);
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

private:
  // Distributes [pos, end) over pattern elements from `element` on; every
  // element takes at least one token.
  void place(const ExprTree& y, const WordPattern& pattern, std::size_t element, std::size_t pos, std::size_t end,
             std::vector<TokenSpan> segments, const TextMathTree* a, const TextMathTree* b,
             std::vector<TextMathTree>& out)
  {
    const std::size_t remaining = pattern.size() - element;
    if (remaining == 0) {
      if (pos == end) {
        if (out.size() >= cap_)
          throw EnumerationCapExceeded("more than " + std::to_string(cap_) + " joint trees");
        out.push_back(TextMathTree::binary(y.symbol(), pattern, segments, *a, *b));
      }
      return;
    }
    if (end - pos < remaining)
      return;
    const std::size_t last = end - (remaining - 1);
    for (std::size_t stop = pos + 1; stop <= last; ++stop) {
      switch (pattern[element]) {
      case PatternElement::W: {
        auto next = segments;
        next.push_back(TokenSpan{pos, stop});
        place(y, pattern, element + 1, stop, end, std::move(next), a, b, out);
        break;
      }
      case PatternElement::A:
        for (const auto& child : trees(y.left(), pos, stop))
          place(y, pattern, element + 1, stop, end, segments, &child, b, out);
        break;
      case PatternElement::B:
        for (const auto& child : trees(y.right(), pos, stop))
          place(y, pattern, element + 1, stop, end, segments, a, &child, out);
        break;
      }
    }
  }

  const std::vector<Quantity>& quantities_;
  std::size_t cap_;
  const PatternSet& patterns_;
  std::map<std::tuple<const ExprTree*, std::size_t, std::size_t>, std::vector<TextMathTree>> memo_;
};

} // namespace

std::vector<TextMathTree> enumerate_joint(const Tokens& x, const ExprTree& y, const std::vector<Quantity>& quantities,
                                          std::optional<std::size_t> cap, const PatternSet& patterns)
{
  if (x.size() > 12 && !cap)
    throw std::invalid_argument("enumerate_joint needs a cap for inputs longer than 12 tokens");
  if (x.empty())
    return {};
  JointEnumerator enumerator(quantities, cap.value_or(std::size_t(1) << 40), patterns);
  return enumerator.trees(y, 0, x.size());
}

namespace {

void dump_into(const TextMathTree& tree, const Tokens& tokens, int depth, std::string& out)
{
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += tree.kind.label();
  out += ' ';
  out += tree.pattern.name();
  for (const auto& span : tree.segments)
    out += " {" + span_text(tokens, span) + "}";
  out += '\n';
  for (const auto& c : tree.children)
    dump_into(c, tokens, depth + 1, out);
}

} // namespace

std::string dump(const TextMathTree& tree, const Tokens& tokens)
{
  std::string out;
  dump_into(tree, tokens, 0, out);
  return out;
}

} // namespace hymath
