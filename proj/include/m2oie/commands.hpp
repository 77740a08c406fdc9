#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace m2oie {

// Entry point of the m2oie tool. args[0] is the program name. Returns the
// process exit code: 0 on success, 1 on a failed command or validation, 2 on
// a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace m2oie
