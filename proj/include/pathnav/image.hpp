#pragma once

#include <cstdint>
#include <vector>

namespace pathnav {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Interleaved 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, Rgb fill = {255, 255, 255});

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t pixel_count() const {
    return std::size_t(width) * std::size_t(height);
  }

  std::uint8_t* px(int x, int y) {
    return data.data() + (std::size_t(y) * width + x) * 3;
  }
  const std::uint8_t* px(int x, int y) const {
    return data.data() + (std::size_t(y) * width + x) * 3;
  }

  Rgb at(int x, int y) const {
    const std::uint8_t* p = px(x, y);
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    std::uint8_t* p = px(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  bool operator==(const Image&) const = default;
};

// Copies the rectangle [x, x+w) x [y, y+h); throws OutOfBounds when the
// rectangle does not fit inside the source.
Image crop_image(const Image& src, int x, int y, int w, int h);

// Separable resize: area average on axes that shrink, bilinear on axes that
// grow, plain copy when the size is unchanged. Interior arithmetic is float;
// the only quantization steps are the u8 endpoints.
Image resize_image(const Image& src, int out_w, int out_h);

}  // namespace pathnav
