#include "pathnav/slide.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "pathnav/errors.hpp"
#include "pathnav/image_io.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

namespace {

long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

}  // namespace

const PyramidLevel& SlidePyramid::level_for(double target) const {
  const PyramidLevel* best = &levels.front();
  for (const PyramidLevel& level : levels) {
    if (level.downsample <= target + 1e-9 &&
        level.downsample > best->downsample) {
      best = &level;
    }
  }
  return *best;
}

SlidePyramid load_pyramid(const std::filesystem::path& manifest_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::unreadable_raster,
                "bad slide manifest " + manifest_path.string() + ": " + e.what());
  }

  SlidePyramid pyramid;
  try {
    pyramid.slide_id = doc.at("slide_id").get<std::string>();
    pyramid.width_px = doc.at("width_px").get<long long>();
    pyramid.height_px = doc.at("height_px").get<long long>();
    if (doc.contains("mpp") && !doc["mpp"].is_null()) {
      pyramid.mpp = doc["mpp"].get<double>();
    }
    for (const auto& entry : doc.at("levels")) {
      PyramidLevel level;
      level.downsample = entry.at("downsample").get<double>();
      level.path = manifest_path.parent_path() /
                   entry.at("path").get<std::string>();
      pyramid.levels.push_back(std::move(level));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::unreadable_raster,
                "bad slide manifest field: " + std::string(e.what()));
  }

  if (pyramid.levels.empty()) {
    throw Error(Errc::missing_level, "manifest declares no levels");
  }
  std::sort(pyramid.levels.begin(), pyramid.levels.end(),
            [](const PyramidLevel& a, const PyramidLevel& b) {
              return a.downsample < b.downsample;
            });
  if (pyramid.levels.front().downsample != 1.0) {
    throw Error(Errc::missing_level, "no base level with downsample 1");
  }
  if (pyramid.width_px < 1 || pyramid.height_px < 1) {
    throw Error(Errc::dimension_mismatch, "slide dimensions must be positive");
  }

  for (PyramidLevel& level : pyramid.levels) {
    level.raster = load_image(level.path);
    long long want_w = ceil_div(pyramid.width_px, (long long)std::llround(level.downsample));
    long long want_h = ceil_div(pyramid.height_px, (long long)std::llround(level.downsample));
    if (level.downsample != std::floor(level.downsample)) {
      want_w = (long long)std::ceil(pyramid.width_px / level.downsample);
      want_h = (long long)std::ceil(pyramid.height_px / level.downsample);
    }
    if (std::llabs(level.raster.width - want_w) > 1 ||
        std::llabs(level.raster.height - want_h) > 1) {
      throw Error(Errc::dimension_mismatch,
                  "level " + level.path.filename().string() + " is " +
                      std::to_string(level.raster.width) + "x" +
                      std::to_string(level.raster.height) + ", expected " +
                      std::to_string(want_w) + "x" + std::to_string(want_h) +
                      " for downsample " + std::to_string(level.downsample));
    }
  }
  return pyramid;
}

Image make_thumbnail(const SlidePyramid& pyramid, int factor) {
  if (factor < 1) throw Error(Errc::invalid_args, "thumbnail factor must be >= 1");
  int out_w = int(ceil_div(pyramid.width_px, factor));
  int out_h = int(ceil_div(pyramid.height_px, factor));
  const PyramidLevel& level = pyramid.level_for(double(factor));
  return resize_image(level.raster, out_w, out_h);
}

Image read_base_rect(const SlidePyramid& pyramid, long long x, long long y,
                     long long w, long long h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > pyramid.width_px ||
      y + h > pyramid.height_px) {
    throw Error(Errc::out_of_bounds, "rectangle outside slide bounds");
  }
  return crop_image(pyramid.base(), int(x), int(y), int(w), int(h));
}

Image read_preview_rect(const SlidePyramid& pyramid, long long x, long long y,
                        long long w, long long h, int max_side) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > pyramid.width_px ||
      y + h > pyramid.height_px) {
    throw Error(Errc::out_of_bounds, "rectangle outside slide bounds");
  }
  long long long_side = std::max(w, h);
  if (long_side <= max_side) return read_base_rect(pyramid, x, y, w, h);

  double scale = double(long_side) / max_side;
  const PyramidLevel& level = pyramid.level_for(scale);
  double ds = level.downsample;
  int lx = std::clamp(int(std::floor(x / ds)), 0, level.raster.width - 1);
  int ly = std::clamp(int(std::floor(y / ds)), 0, level.raster.height - 1);
  int lw = std::clamp(int(std::lround(w / ds)), 1, level.raster.width - lx);
  int lh = std::clamp(int(std::lround(h / ds)), 1, level.raster.height - ly);
  Image patch = crop_image(level.raster, lx, ly, lw, lh);

  int pw = std::max(1, int(std::lround(w / scale)));
  int ph = std::max(1, int(std::lround(h / scale)));
  if (patch.width == pw && patch.height == ph) return patch;
  return resize_image(patch, pw, ph);
}

RegionImage load_region_image(const std::filesystem::path& raster_path) {
  RegionImage region;
  region.pixels = load_image(raster_path);
  region.slide_id = raster_path.stem().string();

  std::filesystem::path sidecar = raster_path;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    try {
      nlohmann::json doc = nlohmann::json::parse(read_text_file(sidecar));
      region.region_id = doc.value("region_id", 0LL);
      region.slide_id = doc.value("slide_id", region.slide_id);
      if (doc.contains("origin")) {
        region.origin_x = doc["origin"].at(0).get<long long>();
        region.origin_y = doc["origin"].at(1).get<long long>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::schema_violation,
                  "bad region sidecar " + sidecar.string() + ": " + e.what());
    }
  }
  return region;
}

}  // namespace pathnav
