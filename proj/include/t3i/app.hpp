#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace t3i {

/// Command-line entry point. args excludes the program name. Returns 0 on
/// success, 1 for usage and parse errors, 2 for physics-domain errors.
int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace t3i
