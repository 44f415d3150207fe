#include "pmelab/io_util.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "pmelab/errors.hpp"

namespace pmelab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  std::error_code ec;
  fs::create_directories(dir, ec);

  fs::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw ValidationError("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw ValidationError("rename failed for " + path.string() + ": " + ec.message());
}

}  // namespace pmelab
