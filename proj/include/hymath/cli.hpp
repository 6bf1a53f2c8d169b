#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hymath::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// One registered flag of one subcommand.
struct FlagDoc
{
  std::string subcommand;
  std::string name;           // long name without dashes
  std::string type;           // flag, int, float, text, path
  std::string default_value;  // as shown in help; empty when required
  std::string description;
  std::string example;        // a value the flag accepts
};

std::vector<FlagDoc> flag_registry();

std::vector<std::string> subcommands();

/// Help text of one subcommand, as printed by `<subcommand> --help`.
std::string help_text(const std::string& subcommand);

/// Parses `args` (subcommand first) with any --config file applied and
/// returns every setting of that subcommand by flag name. Throws UsageError.
nlohmann::json resolve(const std::vector<std::string>& args);

/// Entry point: runs the subcommand, writing results to `out` and diagnostics
/// to `err`. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hymath::cli
