#pragma once

#include <string>
#include <vector>

namespace vorwave {

// Entry point of the command-line tool; args exclude the program name.
// Returns the process exit code:
//   0  success
//   2  configuration or input error (bad flags, bad config file, bad index)
//   3  solver divergence; partial results are still written
//   4  a state failed a validity requirement (the condition is named on stderr)
//   1  unexpected internal error
int run_cli(const std::vector<std::string>& args);

}  // namespace vorwave
