#include "pathnav/grid_overlay.hpp"

#include <cmath>

#include "pathnav/util.hpp"

namespace pathnav {

namespace {

// Row-major 5x7 glyphs, one byte per row, low 5 bits used (MSB = left).
struct Glyph {
  char ch;
  std::uint8_t rows[7];
};

const Glyph kGlyphs[] = {
    {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},
    {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
    {'2', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}},
    {'3', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},
    {'4', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},
    {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
    {'6', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},
    {'7', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},
    {'9', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},
    {':', {0x00, 0x0c, 0x0c, 0x00, 0x0c, 0x0c, 0x00}},
    {'-', {0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
};

const std::uint8_t kBoxGlyph[7] = {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f};

const std::uint8_t* glyph_rows(char c) {
  for (const Glyph& g : kGlyphs) {
    if (g.ch == c) return g.rows;
  }
  return kBoxGlyph;
}

// Grid line positions for one axis: every multiple of `interval`, with
// out-of-range hits pinned to the last pixel.
std::vector<int> line_positions(int dim, double interval) {
  std::vector<int> out;
  int k_max = int(std::floor(1.0 / interval + 1e-9));
  for (int k = 0; k <= k_max; ++k) {
    int pos = int(std::lround(k * interval * dim));
    pos = std::min(pos, dim - 1);
    if (out.empty() || out.back() != pos) out.push_back(pos);
  }
  return out;
}

std::string coordinate_label(double value) {
  long long hundredths = std::llround(value * 100.0);
  std::string s = fixed_decimal(hundredths, 2);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

void draw_text(Image& image, int x, int y, std::string_view text, Rgb color,
               int scale) {
  int cx = x;
  for (char c : text) {
    const std::uint8_t* rows = glyph_rows(c);
    for (int gy = 0; gy < 7; ++gy) {
      for (int gx = 0; gx < 5; ++gx) {
        if (!(rows[gy] & (1 << (4 - gx)))) continue;
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) {
            int px = cx + gx * scale + sx;
            int py = y + gy * scale + sy;
            if (px >= 0 && px < image.width && py >= 0 && py < image.height) {
              image.set(px, py, color);
            }
          }
        }
      }
    }
    cx += 6 * scale;
  }
}

int text_width(std::string_view text, int scale) {
  if (text.empty()) return 0;
  return int(text.size()) * 6 * scale - scale;
}

int text_height(int scale) { return 7 * scale; }

void fill_rect(Image& image, PixelRect rect, Rgb color) {
  int x0 = std::max(rect.x, 0);
  int y0 = std::max(rect.y, 0);
  int x1 = std::min(rect.x + rect.w, image.width);
  int y1 = std::min(rect.y + rect.h, image.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) image.set(x, y, color);
  }
}

void draw_rect_outline(Image& image, PixelRect rect, Rgb color, int thickness) {
  fill_rect(image, {rect.x, rect.y, rect.w, thickness}, color);
  fill_rect(image, {rect.x, rect.y + rect.h - thickness, rect.w, thickness}, color);
  fill_rect(image, {rect.x, rect.y, thickness, rect.h}, color);
  fill_rect(image, {rect.x + rect.w - thickness, rect.y, thickness, rect.h}, color);
}

void draw_labeled_boxes(Image& image,
                        const std::vector<std::pair<PixelRect, std::string>>& boxes,
                        Rgb color, int thickness) {
  for (const auto& [rect, label] : boxes) {
    draw_rect_outline(image, rect, color, thickness);
    draw_text(image, rect.x + thickness + 2, rect.y + thickness + 2, label, color);
  }
}

Image annotate_grid(const Image& image, double interval, Rgb line_color) {
  if (!(interval > 0.0 && interval < 1.0)) {
    throw Error(Errc::invalid_args, "grid interval must be in (0, 1)");
  }
  Image out = image;

  const int lw_x = std::max(1, int(std::lround(out.width / 500.0)));
  const int lw_y = std::max(1, int(std::lround(out.height / 500.0)));
  const std::vector<int> xs = line_positions(out.width, interval);
  const std::vector<int> ys = line_positions(out.height, interval);

  for (int x : xs) {
    int x0 = std::min(x, out.width - lw_x);
    fill_rect(out, {x0, 0, lw_x, out.height}, line_color);
  }
  for (int y : ys) {
    int y0 = std::min(y, out.height - lw_y);
    fill_rect(out, {0, y0, out.width, lw_y}, line_color);
  }

  // Coordinate labels: interior lines only, top edge for x, left edge for y.
  const int scale_x = lw_x;
  const int scale_y = lw_y;
  for (int k = 1; k * interval < 1.0 - 1e-9; ++k) {
    double value = k * interval;
    std::string label = coordinate_label(value);
    int x = std::min(int(std::lround(value * out.width)), out.width - 1);
    draw_text(out, x + lw_x + scale_x, scale_y, label, line_color, scale_x);
    int y = std::min(int(std::lround(value * out.height)), out.height - 1);
    draw_text(out, scale_x, y + lw_y + scale_y, label, line_color, scale_y);
  }
  return out;
}

}  // namespace pathnav
