#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mrtcee {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs `mrtcee <estimate|samplesize|simulate> ...`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace mrtcee
