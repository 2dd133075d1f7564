#include <iostream>

#include "parseval/cli.hpp"

int main(int argc, char** argv) {
  return parseval::cli::main_entry(argc, argv, std::cout, std::cerr);
}
