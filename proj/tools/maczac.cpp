#include <iostream>

#include "maczac/cli.hpp"

int main(int argc, char** argv) { return maczac::run_cli(argc, argv, std::cout, std::cerr); }
