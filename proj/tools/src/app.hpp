#pragma once

#include <iosfwd>

namespace fexprobe::cli {

/// Parses the command line and runs one subcommand. Returns the process
/// exit code: 0 success, 1 usage error, 2 input format, 3 precondition,
/// 4 I/O. Failures also print a one-line JSON record to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fexprobe::cli
