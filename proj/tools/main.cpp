#include <iostream>

#include "secperc_cli.hpp"

int main(int argc, char** argv) { return secperc::cli::run(argc, argv, std::cout, std::cerr); }
