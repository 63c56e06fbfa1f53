#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "taxwb/core/error.hpp"

namespace taxwb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitBackend = 3;

/// Exit code for a library error: backend failures map to kExitBackend,
/// everything else to kExitData.
int exit_code_for(const Error& error) noexcept;

/// The taxwb command line. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace taxwb
