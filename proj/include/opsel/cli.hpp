#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opsel {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Entry point for `opsel <analyze|simulate|sweep|serve> ...`. `args`
/// excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opsel
