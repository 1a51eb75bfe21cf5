#include <iostream>
#include <string>
#include <vector>

#include "obbkit/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return obb::run_cli(args, std::cin, std::cout, std::cerr);
}
