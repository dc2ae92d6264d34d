#include <iostream>

#include "geobound/cli.hpp"

int main(int argc, char** argv) { return geobound::run_cli(argc, argv, std::cout, std::cerr); }
