#include "pathnav/view_ops.hpp"

namespace pathnav {

ViewImage crop_viewport(const RegionImage& region, const Viewport& viewport,
                        int out_res) {
  if (region.pixels.empty()) {
    throw Error(Errc::invalid_args, "crop_viewport on empty region");
  }
  if (out_res < 1) throw Error(Errc::invalid_args, "out_res must be >= 1");

  NormWindow window = viewport_window(viewport);
  PixelRect rect = window_to_rect(window, region.width(), region.height());

  ViewImage view;
  view.requested = viewport;
  view.viewport = viewport;
  view.viewport.cx = window.x0 + window.side / 2.0;
  view.viewport.cy = window.y0 + window.side / 2.0;
  // the clamp slid the window iff its origin moved off the unclamped spot
  view.clamped = window.x0 != viewport.cx - window.side / 2.0 ||
                 window.y0 != viewport.cy - window.side / 2.0;
  view.provenance = rect;
  view.pixels = resize_image(crop_image(region.pixels, rect.x, rect.y, rect.w, rect.h),
                             out_res, out_res);
  return view;
}

std::vector<Viewport> multiscale_grid_viewports() {
  std::vector<Viewport> views;
  views.reserve(21);
  views.push_back({0.5, 0.5, 1.0});
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      views.push_back({0.25 + 0.5 * i, 0.25 + 0.5 * j, 2.0});
    }
  }
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      views.push_back({0.125 + 0.25 * i, 0.125 + 0.25 * j, 4.0});
    }
  }
  return views;
}

std::vector<ViewImage> multiscale_grid(const RegionImage& region, int out_res) {
  std::vector<ViewImage> out;
  out.reserve(21);
  int index = 0;
  for (const Viewport& v : multiscale_grid_viewports()) {
    ViewImage view = crop_viewport(region, v, out_res);
    view.step_index = index++;
    out.push_back(std::move(view));
  }
  return out;
}

}  // namespace pathnav
