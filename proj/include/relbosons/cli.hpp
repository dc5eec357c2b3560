#pragma once

#include <filesystem>
#include <string>

namespace relbosons::cli {

/// Entry point of the `relbosons` tool. Returns 0 on success, 2 on flag
/// errors (usage printed to stderr) and 1 when a computation fails.
int run(int argc, const char* const* argv);

/// Writes `content` to a temporary file next to `path` and renames it over
/// `path`, so readers never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// %.9g, with "inf"/"nan" spelled the same on every platform.
std::string format_number(double v);

}  // namespace relbosons::cli
