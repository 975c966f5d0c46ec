#include <iostream>

#include "melda/cli.hpp"

int main(int argc, char** argv) { return melda::cli::run(argc, argv, std::cout, std::cerr); }
