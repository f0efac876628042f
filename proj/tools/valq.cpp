#include <iostream>

#include "valq/cli.hpp"

int main(int argc, char** argv) { return valq::cli::run(argc, argv, std::cout, std::cerr); }
