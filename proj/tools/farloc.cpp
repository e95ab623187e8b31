#include "farloc/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return farloc::cli::main(argc, argv, std::cout, std::cerr);
}
