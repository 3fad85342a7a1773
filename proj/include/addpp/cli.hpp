#pragma once

#include <string>
#include <vector>

namespace addpp::cli {

// Runs one CLI invocation (args exclude the program name) and returns the
// process exit code: 0 ok, 2 usage or input error, 3 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace addpp::cli
