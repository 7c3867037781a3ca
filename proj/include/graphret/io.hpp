#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace graphret::io {

// Reads a whole file; gzip-compressed input is decompressed transparently.
std::string read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::string_view contents);

// Calls fn(line, line_number) for each line, stripping a trailing '\r'. line_number is 1-based.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, ++line_no);
    pos = end + 1;
  }
}

}  // namespace graphret::io
