#include "bopt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return bopt::cli_dispatch(std::vector<std::string>(argv, argv + argc), std::cin, std::cout, std::cerr);
}
