#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace edgepose::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kParse = 3,   // unreadable or malformed input, unwritable output
  kEmpty = 4,   // pipeline produced nothing (no pose)
  kPipeline = 5,
};

/// Runs one subcommand. args[0] is the subcommand name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edgepose::cli
