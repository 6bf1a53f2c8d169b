#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hymath {

using Tokens = std::vector<std::string>;

/// Half-open token range [begin, end).
struct TokenSpan
{
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t position) const { return begin <= position && position < end; }
  bool operator==(const TokenSpan&) const = default;
};

/// Space-joined tokens of a span.
std::string span_text(const Tokens& tokens, TokenSpan span);

} // namespace hymath
