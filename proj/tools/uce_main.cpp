#include "uce/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return uce::cli::run(argc, argv, std::cout, std::cerr);
}
