#include <iostream>

#include "earnvol/cli.hpp"

int main(int argc, char** argv) { return earnvol::cli::dispatch(argc, argv, std::cout, std::cerr); }
