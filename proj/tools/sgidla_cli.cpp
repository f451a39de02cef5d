#include <iostream>
#include <string>
#include <vector>

#include "sgidla/io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sgidla::run_main(args, std::cout, std::cerr);
}
