#include <iostream>

#include "laserguard/cli.hpp"

int main(int argc, char** argv) { return laserguard::cli::run_cli(argc, argv, std::cout, std::cerr); }
