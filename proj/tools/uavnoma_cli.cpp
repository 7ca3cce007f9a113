#include "uavnoma/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return uavnoma::cli_main(argc, argv, std::cout, std::cerr); }
