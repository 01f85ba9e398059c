#include <iostream>

#include "freedst/cli.hpp"

int main(int argc, char** argv) { return freedst::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
