#pragma once

#include <ostream>

namespace spme::app {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kValidation = 2,
  kSolver = 3,
  kMissingFile = 4,
  kOutput = 5,
};

// Entry point of the spme tool. Errors are reported on `err` as one line of
// JSON: {"error": kind, "field": ..., "message": ...}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spme::app
