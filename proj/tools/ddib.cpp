#include <iostream>
#include <string>
#include <vector>

#include "ddib/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ddib::run_cli(args, std::cout, std::cerr);
}
