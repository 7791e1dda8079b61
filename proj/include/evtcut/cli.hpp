#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evtcut::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;

// Runs the `evtcut` command line. args[0] is the program name. Data goes to
// `out` (or --output), warnings and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evtcut::cli
