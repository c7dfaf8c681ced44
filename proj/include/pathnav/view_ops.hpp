#pragma once

#include <string>
#include <vector>

#include "pathnav/geometry.hpp"
#include "pathnav/image.hpp"

namespace pathnav {

inline constexpr int kDefaultViewResolution = 1008;
inline constexpr int kDefaultRegionSize = 16000;

// One huge region cut from a slide, carrying its provenance rectangle in
// slide base coordinates.
struct RegionImage {
  long long region_id = 0;
  std::string slide_id;
  long long origin_x = 0;
  long long origin_y = 0;
  Image pixels;

  int width() const { return pixels.width; }
  int height() const { return pixels.height; }
};

struct ViewImage {
  Viewport viewport;       // viewport actually rendered
  Viewport requested;      // viewport as asked for
  bool clamped = false;    // center slid or magnification capped
  int step_index = -1;
  PixelRect provenance;    // source rectangle inside the region raster
  Image pixels;            // out_res x out_res
};

// Crops the viewport window from the region and resizes it to a square
// out_res raster (area average when shrinking, bilinear when enlarging).
ViewImage crop_viewport(const RegionImage& region, const Viewport& viewport,
                        int out_res = kDefaultViewResolution);

// The fixed 21-view decomposition: 1 view at 1x, 4 at 2x, 16 at 4x,
// row-major within each scale.
std::vector<ViewImage> multiscale_grid(const RegionImage& region,
                                       int out_res = kDefaultViewResolution);
std::vector<Viewport> multiscale_grid_viewports();

}  // namespace pathnav
