#include <iostream>

#include "mibo/cli/commands.hpp"

int main(int argc, char** argv) { return mibo::cli::run_cli(argc, argv, std::cout, std::cerr); }
