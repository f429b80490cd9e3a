#include <iostream>

#include "twinsynth/cli.hpp"

int main(int argc, char** argv) { return twinsynth::dispatch(argc, argv, std::cout, std::cerr, std::cin); }
