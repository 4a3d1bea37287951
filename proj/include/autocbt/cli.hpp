#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace autocbt::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;   // bad config, input or usage
inline constexpr int kBackendError = 3;  // model or judge failure after retries

// Subcommands: consult, batch, evaluate, compare, refusals, validate-config,
// sample, classify. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace autocbt::cli
