#include <iostream>
#include <string>
#include <vector>

#include "gdl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return gdl::cli::run(args, std::cout, std::cerr);
}
