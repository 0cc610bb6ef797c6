#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ultra::cli {

/// Runs the command line `args` (without the program name). Regular output
/// goes to `out`; failures print {"error": {...}} JSON to `err`.
/// Returns 0 on success, 2 on usage errors, 1 on any other failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ultra::cli
