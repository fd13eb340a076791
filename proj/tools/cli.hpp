#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gbsde::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitUsage = 64;

/// Parses argv, runs one command and returns the process exit code.
/// Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Comma-separated penalty levels. "a,b,...,c" extends the geometric
/// progression a, b, b*(b/a), ... until it reaches c exactly.
std::vector<double> parse_penalty_list(std::string_view text);

}  // namespace gbsde::cli
