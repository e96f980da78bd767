#include "convlab/cli.hpp"

int main(int argc, char** argv) { return convlab::cli::main(argc, argv); }
