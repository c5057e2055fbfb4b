#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rgf {

/// The `rgf` command line. Returns the process exit code: 0 on success, 2 for
/// an unknown subcommand, 1 (or the argument parser's code) on any other
/// error, with a one-line diagnostic on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rgf
