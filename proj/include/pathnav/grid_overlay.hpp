#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pathnav/geometry.hpp"
#include "pathnav/image.hpp"

namespace pathnav {

// Returns a copy with grid lines at every multiple of `interval` along both
// axes plus coordinate labels along the top and left edges. Drawing is solid
// color, so applying it twice is a no-op. Labels use the embedded 5x7 font.
Image annotate_grid(const Image& image, double interval = 0.1,
                    Rgb line_color = {0, 0, 0});

// 5x7 bitmap text, scaled by an integer factor. Glyphs cover digits, '.',
// ':', '-' and space; anything else renders as a hollow box.
void draw_text(Image& image, int x, int y, std::string_view text, Rgb color,
               int scale = 1);
int text_width(std::string_view text, int scale = 1);
int text_height(int scale = 1);

void fill_rect(Image& image, PixelRect rect, Rgb color);
void draw_rect_outline(Image& image, PixelRect rect, Rgb color, int thickness = 1);

// Rectangle outlines with a label at the top-left corner; used to render
// region boundaries and ids onto a thumbnail.
void draw_labeled_boxes(Image& image,
                        const std::vector<std::pair<PixelRect, std::string>>& boxes,
                        Rgb color, int thickness = 1);

}  // namespace pathnav
