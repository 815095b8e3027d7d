#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairaudit::cli {

/// Exit codes: 0 success, 1 usage, 2 data or validation, 3 numerical.
int run(int argc, char** argv);
/// Same as above with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairaudit::cli
