#include <iostream>

#include "qkern/harness.hpp"

int main(int argc, char** argv) { return qkern::harness::run_cli(argc, argv, std::cout, std::cerr); }
