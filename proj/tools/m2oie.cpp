#include <iostream>
#include <string>
#include <vector>

#include "m2oie/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return m2oie::run_cli(args, std::cout, std::cerr);
}
