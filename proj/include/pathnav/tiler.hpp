#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathnav/image.hpp"
#include "pathnav/slide.hpp"

namespace pathnav {

struct RegionSpec {
  long long region_id = 0;  // row-major over the grid
  long long x = 0;
  long long y = 0;
  long long w = 0;
  long long h = 0;
  std::optional<double> tissue_fraction;
};

struct TilingPlan {
  std::string slide_id;
  long long width_px = 0;
  long long height_px = 0;
  int region_size = kDefaultRegionSize;
  double overlap = 0.05;
  long long stride = 0;
  std::vector<RegionSpec> specs;
};

// Grid of region_size windows at stride round(region_size * (1 - overlap)).
// The final row/column is clamped to D - region_size (never padded); slides
// smaller than region_size yield one clamped region.
TilingPlan plan_regions(long long width_px, long long height_px,
                        int region_size = kDefaultRegionSize,
                        double overlap = 0.05);

// Fraction of pixels with HSV saturation > s_min and value < v_max.
// Thresholds are quantized to 1/65536 so the integer kernel is exact.
double tissue_fraction(const Image& image, double s_min = 0.08,
                       double v_max = 0.94);

// Keeps specs whose tissue fraction (measured on a <= max_preview-side
// preview) exceeds min_tissue. Ids are not renumbered.
TilingPlan filter_regions(const TilingPlan& plan, const SlidePyramid& pyramid,
                          double min_tissue = 0.10, double s_min = 0.08,
                          double v_max = 0.94, int max_preview = 512);

RegionImage extract_region(const SlidePyramid& pyramid, const RegionSpec& spec);

// One spec per line:
// {"region_id":..,"slide_id":..,"x":..,"y":..,"w":..,"h":..,"tissue_fraction":..}
std::string region_manifest_jsonl(const TilingPlan& plan);
TilingPlan load_region_manifest(const std::filesystem::path& path);

}  // namespace pathnav
