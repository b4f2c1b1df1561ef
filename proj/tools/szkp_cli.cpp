#include <iostream>

#include "szkp/cli.hpp"

int main(int argc, char** argv) { return szkp::cli::run(argc, argv, std::cout, std::cerr); }
