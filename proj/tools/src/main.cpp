// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "rsr/cli/cli.hpp"

int main(int argc, char** argv) { return rsr::cli::run(argc, argv, std::cout, std::cerr); }
