#include <iostream>
#include <string>
#include <vector>

#include "bwmr/cli/cli.hpp"

int main(int argc, char** argv) {
  return bwmr::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
