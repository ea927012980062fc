#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace woven::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitHypothesisNotSatisfied = 2;

/// Runs one command line (args excludes the program name). Reports go to the
/// --out file; diagnostics go to `err`, short summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace woven::cli
