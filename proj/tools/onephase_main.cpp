#include <iostream>

#include "onephase/cli.hpp"

int main(int argc, char** argv) {
  return onephase::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
