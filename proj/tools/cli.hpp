#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fouriermix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Edit distance, used for "did you mean" hints.
std::size_t levenshtein(const std::string& a, const std::string& b);

} // namespace fouriermix::cli
