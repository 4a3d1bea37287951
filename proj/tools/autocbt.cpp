#include "autocbt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return autocbt::cli::run(argc, argv, std::cout, std::cerr); }
