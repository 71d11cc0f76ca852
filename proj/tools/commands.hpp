#pragma once

#include <string>
#include <vector>

namespace oamfso::cli {

// Runs one subcommand; args excludes the program name. Returns the process
// exit code: 0 success, 2 configuration error, 3 numeric failure, 4 missing
// input, 1 anything else.
int run(const std::vector<std::string>& args);

}  // namespace oamfso::cli
