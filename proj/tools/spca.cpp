#include "spanpca/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return spanpca::run_cli(argc, argv, std::cout, std::cerr); }
