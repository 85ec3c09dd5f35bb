#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "synthcorr/error.hpp"

namespace synthcorr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

int exit_code_for(ErrorKind kind) noexcept;

/// Runs the command line front end. `args` excludes the program name.
/// Results go to `out`; stage log lines and error messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synthcorr::cli
