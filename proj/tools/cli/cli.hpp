// cli.hpp: command dispatch for the pointersim driver
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pointersim::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNumerical = 1,
  kExitConfig = 2,
  kExitCap = 3,
};

/// Commands accepted as the first positional argument.
const std::vector<std::string>& command_names();

/// Full driver: argument parsing, config validation, execution, artifact
/// writing. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pointersim::cli
