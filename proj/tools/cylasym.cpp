#include <iostream>
#include <string>
#include <vector>

#include "cylasym/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cylasym::run_command(args, std::cout, std::cerr);
}
