#include <iostream>

#include "pdisk/cli.hpp"

int main(int argc, char** argv) { return pdisk::cli::run(argc, argv, std::cout, std::cerr); }
