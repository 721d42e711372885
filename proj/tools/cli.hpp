#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace voltopo::cli {

/// Runs one command line. Exit codes: 0 success, 1 invalid usage or input,
/// 2 runtime failure. Diagnostics go to `err` as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace voltopo::cli
