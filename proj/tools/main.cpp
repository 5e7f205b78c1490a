#include <iostream>

#include "ftsvd_cli/app.hpp"

int main(int argc, char** argv) { return ftsvd::cli::run(argc, argv, std::cout, std::cerr); }
