#include <iostream>
#include <string>
#include <vector>

#include "adaloss/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return adaloss::cli::run(args, std::cout, std::cerr);
}
