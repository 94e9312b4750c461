#include "symper/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return symper::cli::run_cli(args, std::cout, std::cerr);
}
