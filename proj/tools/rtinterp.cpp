#include <iostream>

#include "rtinterp/harness.hpp"

int main(int argc, char** argv) { return rtinterp::run_cli(argc, argv, std::cout, std::cerr); }
