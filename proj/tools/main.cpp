#include "d3l/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return d3l::cli::run_cli(argc, argv, std::cout, std::cerr);
}
