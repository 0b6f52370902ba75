#include "dyson/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dyson::cli::main(argc, argv, std::cout, std::cerr); }
