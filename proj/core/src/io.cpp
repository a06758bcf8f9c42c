#include "timbre/io.hpp"

#include <fstream>

#include "timbre/error.hpp"

namespace timbre {

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace timbre
