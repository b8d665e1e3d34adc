#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bgd {

// Writes to a sibling temp file and renames it over `path`, so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Shortest "%.*g" rendering that parses back to the same double.
std::string format_double(double x);

// Fixed 10 significant digits; used for CSV columns.
std::string format_csv(double x);

}  // namespace bgd
