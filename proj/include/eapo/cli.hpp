#pragma once

#include <string>
#include <vector>

namespace eapo::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;     // bad flags or config
inline constexpr int kArtifact = 3;  // unreadable snapshot, dataset or log
inline constexpr int kRuntime = 4;   // scoring or training failure

// Runs one `eapo` command line (args[0] is the program name).
int run(const std::vector<std::string>& args);

std::string version();

}  // namespace eapo::cli
