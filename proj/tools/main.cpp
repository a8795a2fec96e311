#include <iostream>

#include "epispread/cli.hpp"

int main(int argc, char** argv) { return epispread::cli::run(argc, argv, std::cout, std::cerr); }
