#pragma once

// File output shared by the pipelines: atomic writes and CSV number format.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace fjp {

/// Writes to `<path>.tmp` and renames over `path`. Parent directories are
/// created. Throws std::runtime_error on any I/O failure.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form with '.' as separator.
std::string format_double(double value);

}  // namespace fjp
