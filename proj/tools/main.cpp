#include <iostream>

#include "qmcpde/cli.hpp"

int main(int argc, char** argv) { return qmcpde::run_cli(argc, argv, std::cout, std::cerr); }
