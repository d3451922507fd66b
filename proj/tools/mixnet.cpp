#include <iostream>

#include "mixnet/cli.hpp"

int main(int argc, char** argv) { return mixnet::run_cli(argc, argv, std::cout, std::cerr); }
