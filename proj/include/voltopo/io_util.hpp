#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace voltopo {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace voltopo
