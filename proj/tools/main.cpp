#include "blockinfer/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return blockinfer::cli::run_cli(argc, argv, std::cout, std::cerr); }
