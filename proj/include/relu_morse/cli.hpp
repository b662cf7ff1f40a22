#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relu_morse {

/// Runs the relu-morse command line. args excludes the program name.
/// Returns 0 on success, 1 on usage or I/O errors, 2 on domain errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relu_morse
