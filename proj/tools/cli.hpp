#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netsem {

/// Runs the netsem command line. `args` excludes the program name.
/// Returns 0 on success, 1 on a provider failure, 2 on usage or input errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace netsem
