#include <iostream>

#include "fracppp/cli.hpp"

int main(int argc, char** argv) { return fracppp::cli::run(argc, argv, std::cout, std::cerr); }
