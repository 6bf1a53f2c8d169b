#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <hymath/expr.hpp>
#include <hymath/tokens.hpp>

namespace hymath {

struct GoldQuantity
{
  std::size_t index = 0;
  Rational value = 0;
  std::optional<bool> relevant;

  bool operator==(const GoldQuantity&) const = default;
};

struct Instance
{
  std::string id;
  Tokens text;
  std::optional<Tokens> pos;
  std::optional<std::string> expr;  // absent for unlabeled decode inputs
  std::optional<Rational> answer;
  std::optional<std::vector<GoldQuantity>> quantities;

  /// Parsed gold expression; throws ExprError when absent or malformed.
  ExprTree gold() const;

  bool operator==(const Instance&) const = default;
};

class CorpusError : public std::runtime_error
{
public:
  CorpusError(const std::string& message, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Validates one JSON object; `require_expr` rejects unlabeled records.
Instance instance_from_json(const nlohmann::json& j, bool require_expr = true);
nlohmann::json instance_to_json(const Instance& instance);

/// JSON-lines reader; blank lines are skipped, anything else malformed throws
/// CorpusError with the line number.
std::vector<Instance> read_corpus(std::istream& in, bool require_expr = true);
std::vector<Instance> load_corpus(const std::string& path, bool require_expr = true);

void write_corpus(std::ostream& out, const std::vector<Instance>& corpus);
/// Atomic write (temp file + rename).
void save_corpus(const std::string& path, const std::vector<Instance>& corpus);

/// Numbers in data files: JSON numbers, or strings holding decimals or "a/b".
Rational rational_from_json(const nlohmann::json& j);
nlohmann::json rational_to_json(const Rational& value);

} // namespace hymath
