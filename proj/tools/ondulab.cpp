#include <iostream>
#include <string>
#include <vector>

#include "ovd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ovd::run_cli(args, std::cout, std::cerr);
}
