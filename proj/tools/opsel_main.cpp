#include <iostream>

#include "opsel/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return opsel::run_cli(args, std::cout, std::cerr);
}
