#pragma once

#include <string>
#include <vector>

namespace egotraj::cli {

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

std::string version_string();

// Entry point of the `egotraj` tool. Diagnostics go to standard error; help
// and version text to standard output.
int run(int argc, const char* const* argv);
// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args);

}  // namespace egotraj::cli
