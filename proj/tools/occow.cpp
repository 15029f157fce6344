#include <iostream>

#include "occow/cli.hpp"

int main(int argc, char** argv) { return occow::cli::run(argc, argv, std::cout, std::cerr); }
