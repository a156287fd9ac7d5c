#include <iostream>

#include "temprel/commands.hpp"

int main(int argc, char** argv) { return temprel::cli_main(argc, argv, std::cout, std::cerr); }
