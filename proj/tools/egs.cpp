#include <iostream>
#include <string>
#include <vector>

#include "egs/cli/cli.hpp"

int main(int argc, char** argv) {
  return egs::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
