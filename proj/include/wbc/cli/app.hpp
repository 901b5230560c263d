#pragma once

#include <iosfwd>
#include <string>

#include "wbc/param/parameter.hpp"

namespace wbc::cli {

/// Exit codes of the command-line tool.
enum ExitCode { Ok = 0, Failure = 1, BadInput = 2, Timeout = 3 };

struct AppDefaults {
  std::string fixtureDirectory;  // default robot and bench configs
};

/// Entry point of the `wbc` tool: run, traj, bench, introspect, send, plant.
int runApp(int argc, const char* const* argv, const AppDefaults& defaults, std::ostream& out, std::ostream& err);

/// Command-line value text: a JSON number, boolean or number list; anything
/// else is taken as a string.
param::ParamValue parseValue(const std::string& text);

}  // namespace wbc::cli
