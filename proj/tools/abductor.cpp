#include <cstdlib>
#include <iostream>

#include "abductor/cli/cli.hpp"

int main(int argc, char** argv) {
    return abductor::cli::run_cli(argc, argv, std::cout, std::cerr, [](const char* name) { return std::getenv(name); });
}
