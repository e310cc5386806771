#include <iostream>

#include "vdelta/cli.hpp"

int main(int argc, char** argv) { return vdelta::run_cli(argc, argv, std::cout, std::cerr); }
