#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pathnav/image.hpp"
#include "pathnav/view_ops.hpp"

namespace pathnav {

struct PyramidLevel {
  double downsample = 1.0;
  std::filesystem::path path;
  Image raster;
};

// Leveled raster of one slide. Levels are loaded eagerly so a pyramid is a
// plain value afterwards: shareable across threads, no interior mutability.
struct SlidePyramid {
  std::string slide_id;
  long long width_px = 0;
  long long height_px = 0;
  std::optional<double> mpp;
  std::vector<PyramidLevel> levels;

  const Image& base() const { return levels.front().raster; }

  // Level with the largest downsample not exceeding `target` (the finest
  // raster that still needs only shrinking to reach the target scale).
  const PyramidLevel& level_for(double target) const;
};

// Manifest: {"slide_id", "width_px", "height_px", "mpp", "levels":
// [{"downsample", "path"}]}; level paths are relative to the manifest.
SlidePyramid load_pyramid(const std::filesystem::path& manifest_path);

// Whole-slide overview at 1/factor scale; dims are ceil(base / factor).
Image make_thumbnail(const SlidePyramid& pyramid, int factor = 32);

// Base-level pixels of a rectangle in slide coordinates.
Image read_base_rect(const SlidePyramid& pyramid, long long x, long long y,
                     long long w, long long h);

// Cheap view of the same rectangle with max(w, h) capped at `max_side`,
// sourced from the coarsest level that is still at least that fine.
Image read_preview_rect(const SlidePyramid& pyramid, long long x, long long y,
                        long long w, long long h, int max_side = 512);

// Single-region inputs: a bare raster plus optional sidecar
// {"region_id", "slide_id", "origin": [x, y], "size": [w, h]}.
RegionImage load_region_image(const std::filesystem::path& raster_path);

}  // namespace pathnav
