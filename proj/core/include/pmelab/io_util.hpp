#ifndef PMELAB_IO_UTIL_HPP
#define PMELAB_IO_UTIL_HPP

#include <filesystem>
#include <string>

namespace pmelab {

/// Formats with 17 significant digits, enough for exact double round-trips.
std::string format_double(double v);

/// Writes content to path atomically: temp file in the same directory, then
/// rename. Parent directories are created when missing.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace pmelab

#endif
