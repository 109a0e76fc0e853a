#pragma once

#include <string>
#include <vector>

namespace efr::cli {

// Entry point shared by main() and the tests.  `args` excludes the program
// name.  Returns the process exit code: 0 success, 1 runtime failure,
// 2 usage error.
int run(const std::vector<std::string>& args);

int run(int argc, char** argv);

} // namespace efr::cli
