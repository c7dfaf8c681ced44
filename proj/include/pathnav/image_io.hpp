#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pathnav/image.hpp"

namespace pathnav {

// 8-bit rasters only. PNG supports gray/RGB/RGBA sources (normalized to RGB)
// and always encodes RGB; TIFF is baseline uncompressed, strip-based.

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> encode_tiff(const Image& image);
Image decode_tiff(const std::uint8_t* data, std::size_t size);

// Sniffs the container by magic bytes.
Image decode_image(const std::vector<std::uint8_t>& bytes);
Image load_image(const std::filesystem::path& path);

void save_png(const Image& image, const std::filesystem::path& path);
void save_tiff(const Image& image, const std::filesystem::path& path);

}  // namespace pathnav
