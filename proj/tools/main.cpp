#include <iostream>
#include <string>
#include <vector>

#include "relu_morse/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return relu_morse::run_cli(args, std::cout, std::cerr);
}
