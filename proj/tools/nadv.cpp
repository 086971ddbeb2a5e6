#include <iostream>

#include "nadv/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nadv::dispatch(args, std::cout, std::cerr);
}
