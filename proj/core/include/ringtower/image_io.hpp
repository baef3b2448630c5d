#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ringtower/image.hpp"

namespace ringtower {

// PNG codecs for RGB frames. Throws InputError("frame", ...) on unreadable files.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const RgbImage& image);

}  // namespace ringtower
