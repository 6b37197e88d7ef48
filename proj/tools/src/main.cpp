#include <iostream>
#include <string>
#include <vector>

#include "itscale_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return itscale::cli::run(args, std::cout, std::cerr);
}
