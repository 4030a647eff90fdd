#include <iostream>

#include "pdl/cli.hpp"

int main(int argc, char** argv) { return pdl::dispatch(argc, argv, std::cout, std::cerr); }
