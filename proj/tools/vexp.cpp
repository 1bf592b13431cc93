#include <iostream>
#include <string>
#include <vector>

#include "cli_runner.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vexp::cli::run(args, std::cout, std::cerr);
}
