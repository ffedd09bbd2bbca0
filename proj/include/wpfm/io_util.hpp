#pragma once

#include <cstdio>
#include <string>

namespace wpfm {

// Writes content to path via a sibling temp file and rename, so readers never
// observe a partial file. Throws IoError on failure.
void write_file_atomic(const std::string& path, const std::string& content);

// Whole-file read. Throws IoError when the file cannot be opened.
std::string read_file(const std::string& path);

// Shortest fixed formatting that round-trips a double exactly.
inline std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace wpfm
