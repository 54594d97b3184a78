#include <iostream>

#include "growl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return growl::cli::run(args, std::cout, std::cerr);
}
