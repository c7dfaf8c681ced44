#include "pathnav/tiler.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "pathnav/errors.hpp"
#include "pathnav/kernels.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

namespace {

std::vector<long long> axis_positions(long long dim, long long size,
                                      long long stride) {
  if (dim <= size) return {0};
  long long n = (dim - size + stride - 1) / stride + 1;
  std::vector<long long> out;
  out.reserve(std::size_t(n));
  for (long long i = 0; i + 1 < n; ++i) out.push_back(i * stride);
  out.push_back(dim - size);
  return out;
}

}  // namespace

TilingPlan plan_regions(long long width_px, long long height_px,
                        int region_size, double overlap) {
  if (width_px < 1 || height_px < 1) {
    throw Error(Errc::invalid_args, "slide dimensions must be >= 1");
  }
  if (region_size < 1) {
    throw Error(Errc::invalid_args, "region_size must be >= 1");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw Error(Errc::invalid_overlap,
                "overlap must be in [0, 1), got " + std::to_string(overlap));
  }

  TilingPlan plan;
  plan.width_px = width_px;
  plan.height_px = height_px;
  plan.region_size = region_size;
  plan.overlap = overlap;
  plan.stride = std::max<long long>(
      1, std::llround(double(region_size) * (1.0 - overlap)));

  const auto xs = axis_positions(width_px, region_size, plan.stride);
  const auto ys = axis_positions(height_px, region_size, plan.stride);
  const long long w = std::min<long long>(region_size, width_px);
  const long long h = std::min<long long>(region_size, height_px);

  long long id = 0;
  plan.specs.reserve(xs.size() * ys.size());
  for (long long y : ys) {
    for (long long x : xs) {
      plan.specs.push_back({id++, x, y, w, h, std::nullopt});
    }
  }
  return plan;
}

double tissue_fraction(const Image& image, double s_min, double v_max) {
  if (image.empty()) throw Error(Errc::invalid_args, "empty raster");
  if (s_min < 0.0 || v_max < 0.0) {
    throw Error(Errc::invalid_args, "tissue thresholds must be >= 0");
  }
  const std::size_t n = image.pixel_count();
  std::vector<std::uint8_t> r(n), g(n), b(n);
  const std::uint8_t* src = image.data.data();
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = src[i * 3];
    g[i] = src[i * 3 + 1];
    b[i] = src[i * 3 + 2];
  }
  const std::uint32_t s_min_fx =
      std::uint32_t(std::llround(std::min(s_min, 1.0) * 65536.0));
  const std::uint32_t v_hi = std::uint32_t(std::ceil(v_max * 255.0));
  std::size_t count =
      kernels::active().tissue_count(r.data(), g.data(), b.data(), n, s_min_fx, v_hi);
  return double(count) / double(n);
}

TilingPlan filter_regions(const TilingPlan& plan, const SlidePyramid& pyramid,
                          double min_tissue, double s_min, double v_max,
                          int max_preview) {
  TilingPlan out = plan;
  out.specs.clear();
  for (const RegionSpec& spec : plan.specs) {
    Image preview =
        read_preview_rect(pyramid, spec.x, spec.y, spec.w, spec.h, max_preview);
    double fraction = tissue_fraction(preview, s_min, v_max);
    if (fraction > min_tissue) {
      RegionSpec kept = spec;
      kept.tissue_fraction = fraction;
      out.specs.push_back(kept);
    }
  }
  return out;
}

RegionImage extract_region(const SlidePyramid& pyramid, const RegionSpec& spec) {
  RegionImage region;
  region.region_id = spec.region_id;
  region.slide_id = pyramid.slide_id;
  region.origin_x = spec.x;
  region.origin_y = spec.y;
  region.pixels = read_base_rect(pyramid, spec.x, spec.y, spec.w, spec.h);
  return region;
}

std::string region_manifest_jsonl(const TilingPlan& plan) {
  std::ostringstream out;
  for (const RegionSpec& spec : plan.specs) {
    nlohmann::json line{{"region_id", spec.region_id},
                        {"slide_id", plan.slide_id},
                        {"x", spec.x},
                        {"y", spec.y},
                        {"w", spec.w},
                        {"h", spec.h}};
    if (spec.tissue_fraction) {
      line["tissue_fraction"] = *spec.tissue_fraction;
    } else {
      line["tissue_fraction"] = nullptr;
    }
    out << line.dump() << '\n';
  }
  return out.str();
}

TilingPlan load_region_manifest(const std::filesystem::path& path) {
  TilingPlan plan;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(Errc::schema_violation,
                  "line " + std::to_string(line_no) + ": invalid JSON");
    }
    try {
      RegionSpec spec;
      spec.region_id = doc.at("region_id").get<long long>();
      spec.x = doc.at("x").get<long long>();
      spec.y = doc.at("y").get<long long>();
      spec.w = doc.at("w").get<long long>();
      spec.h = doc.at("h").get<long long>();
      if (doc.contains("tissue_fraction") && !doc["tissue_fraction"].is_null()) {
        spec.tissue_fraction = doc["tissue_fraction"].get<double>();
      }
      plan.slide_id = doc.value("slide_id", plan.slide_id);
      plan.specs.push_back(spec);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::schema_violation,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return plan;
}

}  // namespace pathnav
