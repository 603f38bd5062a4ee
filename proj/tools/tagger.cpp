#include <iostream>

#include "cnntag/cli.hpp"

int main(int argc, char** argv) { return cnntag::run(argc, argv, std::cout, std::cerr); }
