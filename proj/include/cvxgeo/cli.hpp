#ifndef CVXGEO_CLI_HPP
#define CVXGEO_CLI_HPP

#include <iosfwd>

namespace cvx {

// Entry point of the cvxgeo command-line tool, callable in-process so tests
// can drive the complete argument-parsing and orchestration surface without
// spawning a process. Returns the process exit code:
//   0  success
//   1  validation failure (a check the run performed did not hold)
//   2  input or configuration error
//   3  solver failure
// Reports go to `out` (stdout in the binary); diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

// Convenience overload wired to std::cout / std::cerr.
int cli_main(int argc, const char* const* argv);

}  // namespace cvx

#endif  // CVXGEO_CLI_HPP
