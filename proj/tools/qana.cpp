#include <iostream>
#include <string>
#include <vector>

#include "qana/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qana::cli_main(args, std::cout, std::cerr);
}
