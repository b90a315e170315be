#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpyr/core_types.hpp"

namespace dpyr {

/// 8-bit RGB raster, row-major, interleaved.
struct Image {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;  // size rows*cols*3

  Image() = default;
  Image(int r, int c, std::uint8_t fill = 0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c * 3, fill) {}

  bool empty() const { return rows == 0 || cols == 0; }

  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * cols + x) * 3 + c;
  }
  std::uint8_t at(int y, int x, int c) const { return data[index(y, x, c)]; }
  std::uint8_t& at(int y, int x, int c) { return data[index(y, x, c)]; }
};

/// Decodes a raster file (PNG, JPEG, ...) to 8-bit RGB. Throws Error when the
/// file is missing or undecodable.
Image load_image(const std::string& path);

/// Encodes by extension (.png, .jpg, ...). Throws Error on failure.
void save_image(const Image& img, const std::string& path);

/// Bilinear resample to exactly (out_rows, out_cols), pixel centers aligned.
Image resize_bilinear(const Image& img, int out_rows, int out_cols);

/// Axis-aligned box outline, clipped to the image, `thickness` pixels thick
/// growing inward.
void draw_box(Image& img, const BBox& box, std::uint8_t r, std::uint8_t g,
              std::uint8_t b, int thickness = 2);

}  // namespace dpyr
