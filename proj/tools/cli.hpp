#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace selmer::cli {

/// Runs one command line (args excludes the program name). Tables go to
/// `out` unless --out is given; messages go to `err`.
/// Returns 0 on success, 1 on a domain error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace selmer::cli
