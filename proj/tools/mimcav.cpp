#include <iostream>

#include "mim/cli.hpp"

int main(int argc, char** argv) {
    return mim::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
