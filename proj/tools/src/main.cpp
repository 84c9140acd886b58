#include <iostream>

#include "horseshoe/cli.hpp"

int main(int argc, char** argv) { return horseshoe::cli::run(argc, argv, std::cout, std::cerr); }
