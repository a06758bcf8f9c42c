#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

namespace timbre {

// Writes to `<path>.tmp` and renames into place, so a failed write never
// leaves a partial file under `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace timbre
