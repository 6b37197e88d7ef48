#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace itscale::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "ITSCALE_OUT_DIR";

/// Runs the tool with argv-style arguments (args[0] is the program name).
/// Diagnostics go to `err`; CSV goes to the --out target, or `out` for "-".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Grid syntax: "a,b,c", "lin:a:b:n", "log:a:b:n" or "circle:n" (n angles 2 pi j / n).
std::vector<double> parse_grid(std::string_view spec);
/// Integer grid; log-spaced values are rounded and deduplicated.
std::vector<int> parse_int_grid(std::string_view spec);

}  // namespace itscale::cli
