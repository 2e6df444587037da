#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace slicegauss::cli {

// Runs one command line (args[0] is the program name) and returns the
// process exit code. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace slicegauss::cli
