#pragma once

#include <string>

namespace hymath {

/// Writes `content` to `path` through a temporary file and a rename, so readers
/// never see a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

} // namespace hymath
