#pragma once

#include <string>
#include <vector>

namespace cyltri {

/// Command-line entry point. `args` excludes the program name.
/// Exit codes: 0 success, 1 usage error, 2 estimation failure, 3 invalid input.
int cli_main(const std::vector<std::string>& args);

int cli_main(int argc, const char* const* argv);

}  // namespace cyltri
