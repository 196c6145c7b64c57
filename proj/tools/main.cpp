#include <iostream>
#include <string>
#include <vector>

#include "vstain/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return vstain::cli::run(args, std::cout, std::cerr);
}
