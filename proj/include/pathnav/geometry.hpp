#pragma once

#include <algorithm>
#include <cmath>

#include "pathnav/errors.hpp"

namespace pathnav {

// Normalized window over a region. Magnification m >= 1 shows a square
// window of side 1/m; m = 1 is the whole region.
struct Viewport {
  double cx = 0.5;
  double cy = 0.5;
  double magnification = 1.0;

  bool operator==(const Viewport&) const = default;
};

// Stored as origin + side so the side survives exactly (x1 = x0 + side).
struct NormWindow {
  double x0 = 0.0;
  double y0 = 0.0;
  double side = 1.0;

  double x1() const { return x0 + side; }
  double y1() const { return y0 + side; }
};

struct PixelRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const PixelRect&) const = default;
};

// Clamps by sliding the window inward; the side is never shrunk.
inline NormWindow viewport_window(const Viewport& v) {
  if (!(v.magnification >= 1.0)) {
    throw Error(Errc::invalid_magnification,
                "magnification must be >= 1, got " +
                    std::to_string(v.magnification));
  }
  const double side = 1.0 / v.magnification;
  NormWindow w;
  w.side = side;
  w.x0 = std::clamp(v.cx - side / 2.0, 0.0, 1.0 - side);
  w.y0 = std::clamp(v.cy - side / 2.0, 0.0, 1.0 - side);
  return w;
}

// Nearest-integer pixel rectangle of a normalized window, at least 1 px,
// slid to stay inside the raster.
inline PixelRect window_to_rect(const NormWindow& win, int width, int height) {
  PixelRect r;
  r.w = std::clamp(int(std::lround(win.side * width)), 1, width);
  r.h = std::clamp(int(std::lround(win.side * height)), 1, height);
  r.x = std::clamp(int(std::lround(win.x0 * width)), 0, width - r.w);
  r.y = std::clamp(int(std::lround(win.y0 * height)), 0, height - r.h);
  return r;
}

}  // namespace pathnav
