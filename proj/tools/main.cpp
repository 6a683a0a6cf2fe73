#include <iostream>
#include <string>
#include <vector>

#include "crowd_assim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return crowd_assim::cli_main(args, std::cout, std::cerr);
}
