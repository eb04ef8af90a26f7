#include <iostream>

#include "csiwater/cli.hpp"

int main(int argc, char** argv) {
  return csiwater::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
