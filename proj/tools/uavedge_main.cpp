#include <iostream>

#include "uavedge/cli.hpp"

int main(int argc, char** argv) { return uavedge::run_cli(argc, argv, std::cout, std::cerr); }
