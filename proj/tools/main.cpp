#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return sccp::cli::run(argc, argv, {std::cout, std::cerr});
}
