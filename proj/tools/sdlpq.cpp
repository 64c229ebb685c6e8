#include <iostream>

#include "sdlpq/cli.hpp"

int main(int argc, char** argv) { return sdlpq::run_cli(argc, argv, std::cout, std::cerr); }
