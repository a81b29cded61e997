#include <iostream>
#include <string>
#include <vector>

#include "arena/cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return arena::cli::run_cli(args, std::cout, std::cerr);
}
