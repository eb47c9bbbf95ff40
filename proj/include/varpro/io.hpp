#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace varpro {

/// Shortest round-trippable decimal form ('.' separator, %.17g).
std::string format_g17(double v);

/// One header row, '\n' line endings, cells joined with ','.
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace varpro
