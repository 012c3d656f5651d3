#include <iostream>
#include <string>
#include <vector>

#include "crtrial/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return crtrial::run_cli(args, std::cout, std::cerr);
}
