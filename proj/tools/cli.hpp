#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace timbre::cli {

// Runs one `timbre <subcommand> ...` invocation. Returns the process exit
// status: 0 on success, 1 on runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace timbre::cli
