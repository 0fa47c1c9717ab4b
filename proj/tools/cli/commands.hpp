#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gdix::cli {

// Exit codes: 0 ok, 1 input error, 2 numerical failure, 3 tolerance gate.
// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gdix::cli
