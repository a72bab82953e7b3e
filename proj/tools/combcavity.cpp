#include "combcavity/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return combcav::cli::run(argc, argv, std::cout, std::cerr);
}
