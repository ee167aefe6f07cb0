#include <iostream>
#include <string>
#include <vector>

#include "edgesr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return edgesr::run_cli(args, std::cout, std::cerr);
}
