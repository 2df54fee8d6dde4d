#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mmrnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `mmrnn` invocation. args excludes the program name. Regular
/// output goes to out, diagnostics and usage text to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Expands `--config FILE` into `--key=value` arguments for every key the
// command line does not already set. Throws std::runtime_error on an
// unreadable file and std::invalid_argument on a malformed line.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace mmrnn::cli
