#include <iostream>

#include "percoflow/cli_runner.hpp"

int main(int argc, char** argv) { return percoflow::run_cli(argc, argv, std::cout, std::cerr); }
