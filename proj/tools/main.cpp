#include <iostream>

#include "wcd/cli.hpp"

int main(int argc, char** argv) { return wcd::cli_main(argc, argv, std::cout, std::cerr); }
