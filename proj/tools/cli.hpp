#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relu_forge::cli {

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 success, 1 build failure or FAIL certificate, 2 invalid usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "a..b" or "a,b,c" into a list of integers; throws on bad syntax.
std::vector<int> parse_range(const std::string& text);

} // namespace relu_forge::cli
