#include <iostream>

#include "taxwb/service/cli.hpp"

int main(int argc, char** argv) { return taxwb::run_cli(argc, argv, std::cout, std::cerr); }
