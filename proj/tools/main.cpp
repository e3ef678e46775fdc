#include <iostream>
#include <string>
#include <vector>

#include "demandcast/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return demandcast::cli::execute(args, std::cout, std::cerr);
}
