#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace strobe {

/// Fixed "%.12g" rendering, so emitted files are byte-stable.
std::string format_number(double v);

/// "# schema: <name>/<version>\n<columns>\n".
std::string csv_header(std::string_view schema, int version, std::string_view columns);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace strobe
