#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace growl::cli {

// Runs one command line (args[0] is the program name). Returns the process
// exit code: 0 on success, 2 for usage/configuration/validation errors,
// 3 for I/O, 4 for data mismatches, 5 for training or generation failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace growl::cli
