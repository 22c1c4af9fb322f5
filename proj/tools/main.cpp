#include <iostream>

#include "sqpo/cli.hpp"

int main(int argc, char** argv) {
    return sqpo::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
