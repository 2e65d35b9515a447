#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace plausible {

struct Gray16Image {
  int width = 0, height = 0;
  std::vector<std::uint16_t> pixels;  // row-major
};

// 16-bit single-channel PNG. Throws MissingFile / IoError.
Gray16Image read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const std::filesystem::path& path, const Gray16Image& image);

// Solid-color 8-bit RGB placeholder.
void write_png_rgb8_solid(const std::filesystem::path& path, int width, int height,
                          std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace plausible
