#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ddib {

/// 8-bit RGB raster, row-major, interleaved channels.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  RgbImage() = default;
  RgbImage(int w, int h);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  std::uint8_t& at(int row, int col, int channel) {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
  std::uint8_t at(int row, int col, int channel) const {
    return data[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
  bool operator==(const RgbImage&) const = default;
};

/// Binary PPM (P6, maxval 255). Comments in the header are skipped.
RgbImage read_ppm(const std::filesystem::path& path);
RgbImage parse_ppm(const std::string& bytes);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
std::string encode_ppm(const RgbImage& image);

}  // namespace ddib
