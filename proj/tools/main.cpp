#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return condwalk::cli::run(argc, argv, std::cout, std::cerr); }
