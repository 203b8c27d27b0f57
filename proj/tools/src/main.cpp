#include "d2cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return d2::cli::run(argc, argv, std::cout, std::cerr); }
