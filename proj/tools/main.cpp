#include <iostream>
#include <string>
#include <vector>

#include "apap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return apap::run_cli(args, std::cout, std::cerr);
}
