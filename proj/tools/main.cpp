#include <iostream>

#include "qmeasure/cli.hpp"

int main(int argc, char** argv) { return qmeasure::cli::run(argc, argv, std::cout, std::cerr); }
