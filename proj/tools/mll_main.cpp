#include <iostream>
#include <vector>

#include "mll/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mll::run_cli(args, std::cout, std::cerr);
}
