#include <iostream>

#include "h2flow/cli.hpp"

int main(int argc, char** argv) { return h2flow::cli_main(argc, argv, std::cout, std::cerr); }
