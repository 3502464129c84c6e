#include "hexftc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hexftc::cli_main(argc, argv, std::cout, std::cerr); }
