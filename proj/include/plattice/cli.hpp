#pragma once

namespace plattice {

// Entry point behind tools/main.cpp; returns the process exit code
// (0 ok, 2 config error, 3 numerical blow-up).
int run_cli(int argc, const char* const* argv);

}  // namespace plattice
