#include <iostream>

#include "ssanet/cli/cli.hpp"

int main(int argc, char** argv) { return ssanet::cli::run(argc, argv, std::cout, std::cerr); }
