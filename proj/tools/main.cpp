#include "plattice/cli.hpp"

int main(int argc, char** argv) { return plattice::run_cli(argc, argv); }
