#include "strobe/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

namespace strobe {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_header(std::string_view schema, int version, std::string_view columns) {
  std::string out = "# schema: ";
  out.append(schema);
  out += "/" + std::to_string(version) + "\n";
  out.append(columns);
  out += "\n";
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_atomic: cannot open " + tmp);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os.flush()) throw std::runtime_error("write_atomic: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace strobe
