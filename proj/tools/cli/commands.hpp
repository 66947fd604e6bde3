#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stereocarto::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;       // bad arguments or configuration
inline constexpr int kExitProcessing = 2;  // I/O or analysis failure

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stereocarto::cli
