#include <iostream>

#include "simforge/cli/cli.hpp"

int main(int argc, char** argv) {
    return simforge::cli::run(argc, argv, std::cout, std::cerr, simforge::cli::Environment::from_process());
}
