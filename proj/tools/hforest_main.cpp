#include <iostream>

#include "hforest/experiment.hpp"

int main(int argc, char** argv) { return hforest::run_cli(argc, argv, std::cout, std::cerr); }
