#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adaloss::cli {

/// Process exit codes of the benchmark driver.
enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,  ///< bad flags, unknown config keys, parameter contract violations
    kDataError = 2,   ///< unreadable/malformed input, generation failure, divergence
    kCheckFailed = 3, ///< gradcheck or ROC cross-check failure
};

/// Runs one subcommand (curve | grid | compare | roc | gradcheck | gendata |
/// train). `args` excludes the program name. Reports go to --out when given,
/// otherwise to `out`; summaries and diagnostics go to `out` when --out is
/// given, otherwise to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads a flat key=value file ('#' comments, blank lines ignored) and
/// returns the argument list with `--key=value` inserted after the
/// subcommand for every key not already present on the command line.
std::vector<std::string> apply_config(const std::vector<std::string>& args);

} // namespace adaloss::cli
