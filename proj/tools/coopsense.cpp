#include "coopsense/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return coopsense::cli::run(argc, argv, std::cout, std::cerr); }
