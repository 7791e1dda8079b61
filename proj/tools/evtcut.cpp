#include <iostream>
#include <string>
#include <vector>

#include "evtcut/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return evtcut::cli::run(args, std::cout, std::cerr);
}
