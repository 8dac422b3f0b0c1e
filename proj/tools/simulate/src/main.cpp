#include <iostream>

#include "ddsim/cli.hpp"

int main(int argc, char** argv) { return ddsim::cli::main(argc, argv, std::cout, std::cerr); }
