#pragma once

// Command-line front end: one subcommand per module, JSON configs checked
// against a typed parameter table, CSV/JSON artifacts written atomically.

#include <iosfwd>
#include <string>
#include <vector>

namespace nonrad::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kNumericalFailure = 2;

/// Subcommands with a parameter table, in display order.
std::vector<std::string> subcommands();

/// JSON schema of a subcommand's config, or of the report envelope for
/// name == "report".
std::string schema_text(const std::string& name);

/// args[0] is the program name. The JSON report goes to out, errors to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace nonrad::cli
