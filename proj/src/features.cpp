#include <hymath/features.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hymath {

namespace {

std::string lowercase(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string orientation_tag(bool reordered) { return reordered ? "R" : "M"; }

std::string sym(Symbol s) { return std::string(symbol_name(s)); }

// Feature name builders shared by both extraction routes.
std::string unigram(Symbol s, const std::string& w) { return "U|" + sym(s) + "|" + w; }
std::string oriented(Symbol s, bool reordered, const std::string& w)
{
  return "UO|" + sym(s) + "|" + orientation_tag(reordered) + "|" + w;
}
std::string bigram(Symbol s, const std::string& a, const std::string& b) { return "B|" + sym(s) + "|" + a + "|" + b; }
std::string postag(Symbol s, const std::string& tag) { return "P|" + sym(s) + "|" + tag; }
std::string lexical(Symbol s, Symbol entry) { return "L|" + sym(s) + "|" + sym(entry); }
std::string pattern_feature(Symbol s, const std::string& pattern) { return "PAT|" + sym(s) + "|" + pattern; }
std::string relevance(bool relevant) { return relevant ? "ID|CON|1" : "ID|CON|0"; }
std::string tree_edge(Symbol parent, Symbol child) { return "T|" + sym(parent) + "|" + sym(child); }

} // namespace

Lexicon Lexicon::parse(std::istream& in)
{
  std::vector<LexiconEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    const auto tab = t.rfind('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": expected phrase<TAB>operator");
    LexiconEntry entry;
    std::istringstream words(lowercase(t.substr(0, tab)));
    for (std::string w; words >> w;)
      entry.phrase.push_back(w);
    if (entry.phrase.empty())
      throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": empty phrase");
    try {
      entry.op = symbol_from_name(trim(t.substr(tab + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": unknown operator");
    }
    if (!is_operator(entry.op))
      throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": not an operator");
    entries.push_back(std::move(entry));
  }
  return Lexicon(std::move(entries));
}

Lexicon Lexicon::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open lexicon " + path);
  return parse(in);
}

std::vector<LexiconMatch> Lexicon::find_all(const Tokens& words) const
{
  std::vector<LexiconMatch> out;
  for (const auto& e : entries_) {
    const std::size_t m = e.phrase.size();
    for (std::size_t b = 0; b + m <= words.size(); ++b)
      if (std::equal(e.phrase.begin(), e.phrase.end(), words.begin() + static_cast<std::ptrdiff_t>(b)))
        out.push_back({b, b + m, e.op});
  }
  return out;
}

Tokens normalize_words(const Tokens& tokens, const std::vector<Quantity>& quantities)
{
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    out.push_back(lowercase(t));
  for (const auto& q : quantities)
    if (q.token < out.size())
      out[q.token] = "<num>";
  return out;
}

SentenceContext SentenceContext::make(Tokens tokens, std::optional<Tokens> pos, std::vector<Quantity> quantities,
                                      const Lexicon* lexicon, FeatureOptions options)
{
  if (pos && pos->size() != tokens.size())
    throw std::invalid_argument("POS tag count differs from token count");
  SentenceContext c;
  c.words = normalize_words(tokens, quantities);
  c.tokens = std::move(tokens);
  c.pos = std::move(pos);
  c.quantities = std::move(quantities);
  c.lexicon = lexicon;
  c.options = options;
  return c;
}

void FeatureVector::add(const std::string& feature, int count)
{
  if (count == 0)
    return;
  auto& v = counts_[feature];
  v += count;
  if (v == 0)
    counts_.erase(feature);
}

void FeatureVector::add(const FeatureVector& other)
{
  for (const auto& [k, v] : other.counts_)
    add(k, v);
}

int FeatureVector::count(const std::string& feature) const
{
  const auto it = counts_.find(feature);
  return it == counts_.end() ? 0 : it->second;
}

FeatureVector extract_node_features(const TextMathTree& node, const SentenceContext& ctx)
{
  FeatureVector f;
  const Symbol s = node.kind.symbol;
  const bool op = is_operator(s);
  const bool reordered = op && reorders(node.pattern);

  for (const TokenSpan& span : node.segments) {
    for (std::size_t t = span.begin; t < span.end; ++t) {
      const std::string& w = ctx.words.at(t);
      f.add(unigram(s, w));
      if (op)
        f.add(oriented(s, reordered, w));
      if (ctx.options.use_pos && ctx.pos)
        f.add(postag(s, (*ctx.pos)[t]));
      if (t > span.begin)
        f.add(bigram(s, ctx.words[t - 1], w));
    }
    if (ctx.options.use_lexicon && ctx.lexicon) {
      for (const auto& e : ctx.lexicon->entries()) {
        const std::size_t m = e.phrase.size();
        for (std::size_t b = span.begin; b + m <= span.end; ++b) {
          bool hit = true;
          for (std::size_t k = 0; k < m && hit; ++k)
            hit = ctx.words[b + k] == e.phrase[k];
          if (hit)
            f.add(lexical(s, e.op));
        }
      }
    }
  }

  f.add(pattern_feature(s, node.pattern.name()));

  if (s == Symbol::Con && ctx.options.use_relevance) {
    for (const auto& q : ctx.quantities) {
      bool inside = false;
      for (const TokenSpan& span : node.segments)
        inside = inside || span.contains(q.token);
      if (inside && q.relevant)
        f.add(relevance(*q.relevant));
    }
  }
  return f;
}

FeatureVector extract_tree_features(const ExprTree& tree)
{
  FeatureVector f;
  for (const auto& c : tree.children()) {
    f.add(tree_edge(tree.symbol(), c.symbol()));
    f.add(extract_tree_features(c));
  }
  return f;
}

namespace {

void add_node_features(const TextMathTree& node, const SentenceContext& context, FeatureVector& out)
{
  out.add(extract_node_features(node, context));
  for (const auto& c : node.children)
    add_node_features(c, context, out);
}

} // namespace

FeatureVector extract_features(const TextMathTree& tree, const SentenceContext& context)
{
  FeatureVector f;
  add_node_features(tree, context, f);
  f.add(extract_tree_features(yield_expr(tree)));
  return f;
}

int FeatureIndex::lookup(const std::string& name) const
{
  const auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

int FeatureIndex::intern(const std::string& name)
{
  const auto [it, inserted] = ids_.try_emplace(name, static_cast<int>(names_.size()));
  if (inserted)
    names_.push_back(name);
  return it->second;
}

int segment_label(Symbol symbol, bool reordered)
{
  if (symbol == Symbol::Con)
    return 0;
  if (symbol == Symbol::Var)
    return 1;
  return 2 + 2 * static_cast<int>(symbol) + (reordered ? 1 : 0);
}

Symbol label_symbol(int label)
{
  if (label == 0)
    return Symbol::Con;
  if (label == 1)
    return Symbol::Var;
  return static_cast<Symbol>((label - 2) / 2);
}

bool label_reordered(int label) { return label >= 2 && (label - 2) % 2 == 1; }

std::vector<Symbol> task_operators(const TaskConfig& task)
{
  auto ops = task.binary_operators();
  if (task.equation_task() || task.var_position != VarPosition::None)
    ops.insert(ops.begin(), Symbol::Equ);
  return ops;
}

InstanceFeatures InstanceFeatures::build(const SentenceContext& ctx, const TaskConfig& task, const PatternSet& patterns,
                                         const FeatureIndex& index)
{
  return build_with(ctx, task, patterns, [&](const std::string& name) { return index.lookup(name); });
}

InstanceFeatures InstanceFeatures::build_growing(const SentenceContext& ctx, const TaskConfig& task,
                                                 const PatternSet& patterns, FeatureIndex& index)
{
  return build_with(ctx, task, patterns, [&](const std::string& name) { return index.intern(name); });
}

template <class IdFn>
InstanceFeatures InstanceFeatures::build_with(const SentenceContext& ctx, const TaskConfig& task,
                                              const PatternSet& patterns, IdFn id)
{
  InstanceFeatures f;
  for (auto& row : f.tree_ids)
    row.fill(-1);
  const std::size_t n = ctx.words.size();
  f.length = n;

  const auto ops = task_operators(task);
  bool any_reordering = false;
  for (const auto& p : patterns.patterns())
    any_reordering = any_reordering || reorders(p);

  f.active[segment_label(Symbol::Con, false)] = true;
  if (task.max_vars > 0 || task.var_position != VarPosition::None)
    f.active[segment_label(Symbol::Var, false)] = true;
  for (Symbol op : ops) {
    f.active[segment_label(op, false)] = true;
    if (any_reordering)
      f.active[segment_label(op, true)] = true;
  }

  for (int label = 0; label < kLabelCount; ++label) {
    if (!f.active[label])
      continue;
    const Symbol s = label_symbol(label);
    const bool op = is_operator(s);
    const bool reordered = label_reordered(label);
    f.token_ids[label].resize(n);
    f.bigram_ids[label].assign(n, -1);
    for (std::size_t t = 0; t < n; ++t) {
      auto& ids = f.token_ids[label][t];
      ids.push_back(id(unigram(s, ctx.words[t])));
      if (op)
        ids.push_back(id(oriented(s, reordered, ctx.words[t])));
      if (ctx.options.use_pos && ctx.pos)
        ids.push_back(id(postag(s, (*ctx.pos)[t])));
      std::erase(ids, -1);
      if (t > 0)
        f.bigram_ids[label][t] = id(bigram(s, ctx.words[t - 1], ctx.words[t]));
    }
  }

  if (ctx.options.use_lexicon && ctx.lexicon) {
    for (const auto& m : ctx.lexicon->find_all(ctx.words)) {
      Match match;
      match.begin = m.begin;
      match.end = m.end;
      match.ids.fill(-1);
      for (int label = 0; label < kLabelCount; ++label)
        if (f.active[label])
          match.ids[label] = id(lexical(label_symbol(label), m.op));
      f.lexicon.push_back(match);
    }
  }

  for (Symbol op : ops) {
    auto& ids = f.pattern_ids[static_cast<int>(op)];
    for (const auto& p : patterns.patterns())
      ids.push_back(id(pattern_feature(op, p.name())));
  }
  for (Symbol parent : ops)
    for (int c = 0; c < kSymbolCount; ++c) {
      const Symbol child = static_cast<Symbol>(c);
      if (child == Symbol::Equ)
        continue;
      if (child == Symbol::Var && !f.active[segment_label(Symbol::Var, false)])
        continue;
      if (is_operator(child) && std::find(ops.begin(), ops.end(), child) == ops.end())
        continue;
      f.tree_ids[static_cast<int>(parent)][c] = id(tree_edge(parent, child));
    }

  const std::string leaf_pattern = enumerate_patterns(0).front().name();
  for (const auto& q : ctx.quantities) {
    std::vector<int> ids{id(pattern_feature(Symbol::Con, leaf_pattern))};
    if (ctx.options.use_relevance && q.relevant)
      ids.push_back(id(relevance(*q.relevant)));
    std::erase(ids, -1);
    f.quantity_leaf_ids.push_back(std::move(ids));
  }
  if (f.active[segment_label(Symbol::Var, false)])
    for (int v = 1; v <= 2; ++v) {
      f.var_leaf_ids[v] = {id(pattern_feature(Symbol::Var, leaf_pattern))};
      std::erase(f.var_leaf_ids[v], -1);
    }
  return f;
}

} // namespace hymath
