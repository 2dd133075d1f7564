#pragma once

// Command-line front end. Parsing and execution live in the library so the
// tests can drive them without spawning processes.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parseval/errors.hpp"

namespace parseval::cli {

enum class Command { csum, correlate, usplit, lemma1, lemma2, averages, crh, fit, expand };
enum class OutputFormat { csv, json };

std::string_view to_string(Command command);

/// Bad flags or flag values. The message names the offending flag.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  Command command = Command::csum;
  /// Raw flag values keyed by flag name without dashes ("N", "h", "grid").
  std::map<std::string, std::string> params;
  /// Empty means stdout.
  std::string output;
  std::optional<OutputFormat> format;
  /// Optional path for x,y plot data.
  std::string plot;
  std::optional<std::uint64_t> memory_budget;
  unsigned threads = 1;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInvariantFailure = 2;

/// One line per subcommand naming the identity or bound it exercises.
std::string explain_text();

/// Parses argv. Returns std::nullopt after printing help or --explain text.
/// Throws UsageError.
std::optional<RunConfig> parse_command_line(int argc, const char* const* argv,
                                            std::ostream& out);

/// Validates the parameters, runs the command and writes its artifacts.
/// Returns kExitOk, kExitInvariantFailure, or kExitUsage (after printing a
/// one-line diagnostic to err).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_command_line followed by run.
int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err);

/// Parses "1e6", "1000000" etc. into an exact unsigned integer.
std::uint64_t parse_count(std::string_view flag, std::string_view text);
double parse_real(std::string_view flag, std::string_view text);
std::vector<std::uint64_t> parse_count_list(std::string_view flag,
                                            std::string_view text);

}  // namespace parseval::cli
