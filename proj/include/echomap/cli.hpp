#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace echomap {

/// Entry point behind the `echomap` tool. args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace echomap
