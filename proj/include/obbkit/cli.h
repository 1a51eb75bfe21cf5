#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace obb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs the command line; args[0] is the program name.
int run_cli(std::span<const std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace obb
