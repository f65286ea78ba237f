#include <iostream>

#include "bm/cli.hpp"

int main(int argc, char** argv) {
    return bm::cli::main_cli(argc, argv, std::cout, std::cerr);
}
