#include <iostream>
#include <string>
#include <vector>

#include "t3i/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return t3i::run_app(args, std::cout, std::cerr);
}
