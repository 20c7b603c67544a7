#pragma once

#include <string>
#include <vector>

namespace orb::cli {

/// Runs a subcommand. Exit codes: 0 pass, 1 invariant failure, 2 config
/// error, 3 numerical failure. Output is deterministic for fixed flags.
int run(const std::vector<std::string>& args);

}  // namespace orb::cli
