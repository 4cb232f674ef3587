#pragma once

#include <string>
#include <vector>

namespace phyloabc {

// Expands `--config FILE` in a raw argument list into --key=value tokens read
// from the file.  Lines are bare key=value pairs, '#' starts a comment, and a
// key that already appears as an explicit --option is skipped, so flags given
// on the command line always win.  Expanded tokens are appended after the
// explicit arguments, which keeps them inside the active subcommand.  Throws
// std::runtime_error on a missing file or a malformed line.
std::vector<std::string> expand_config_args(const std::vector<std::string>& argv_in);

}  // namespace phyloabc
