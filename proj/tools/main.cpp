#include "cli.hpp"

int main(int argc, char** argv) { return plucase::cli::run(argc, argv); }
