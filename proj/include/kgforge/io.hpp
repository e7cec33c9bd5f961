#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kgforge::io {

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace kgforge::io
