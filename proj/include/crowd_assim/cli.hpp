#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crowd_assim {

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns 0 on success, 2 on bad usage or configuration and
/// 1 on runtime failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crowd_assim
