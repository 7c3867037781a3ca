#include "graphret/io.hpp"

#include <zlib.h>

#include <fstream>
#include <memory>

#include "graphret/error.hpp"

namespace graphret::io {

std::string read_file(const std::filesystem::path& path) {
  // gzread passes plain files through unchanged.
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.string().c_str(), "rb"), &gzclose);
  if (!file) throw Error("cannot open " + path.string());
  std::string out;
  char buf[1 << 16];
  for (;;) {
    int n = gzread(file.get(), buf, sizeof(buf));
    if (n < 0) {
      int errnum = 0;
      throw Error("read failed for " + path.string() + ": " + gzerror(file.get(), &errnum));
    }
    if (n == 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace graphret::io
