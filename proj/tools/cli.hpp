#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rfidtrace::cli {

/// Runs the rfidtrace command line. Exit codes: 0 success, 1 operational
/// error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rfidtrace::cli
