#include "pathnav/image.hpp"

#include <cmath>
#include <cstring>

#include "pathnav/errors.hpp"
#include "pathnav/kernels.hpp"

namespace pathnav {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
  data.resize(std::size_t(w) * h * 3);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = fill.r;
    data[i + 1] = fill.g;
    data[i + 2] = fill.b;
  }
}

Image crop_image(const Image& src, int x, int y, int w, int h) {
  if (w < 1 || h < 1 || x < 0 || y < 0 || x + w > src.width ||
      y + h > src.height) {
    throw Error(Errc::out_of_bounds, "crop rectangle outside raster");
  }
  Image out;
  out.width = w;
  out.height = h;
  out.data.resize(std::size_t(w) * h * 3);
  for (int row = 0; row < h; ++row) {
    std::memcpy(out.px(0, row), src.px(x, y + row), std::size_t(w) * 3);
  }
  return out;
}

namespace {

// Per-axis resampling plan. Each output element draws from `taps` consecutive
// source elements beginning at start[o]; unused positions carry zero weight
// and start is clamped so start[o] + taps never leaves the source.
struct AxisMap {
  int taps = 1;
  std::vector<std::int32_t> start;
  std::vector<float> weights;  // taps blocks of `out` floats

  float w(int tap, int o) const { return weights[std::size_t(tap) * start.size() + o]; }
};

AxisMap build_axis_map(int in, int out) {
  AxisMap map;
  map.start.assign(std::size_t(out), 0);

  struct Contribution {
    int first;
    std::vector<double> w;
  };
  std::vector<Contribution> rows{std::size_t(out)};

  if (out < in) {
    // Area average: weight is the overlap of the source cell with the span.
    const double scale = double(in) / double(out);
    for (int o = 0; o < out; ++o) {
      double lo = o * scale;
      double hi = std::min(double(in), (o + 1) * scale);
      int i0 = int(std::floor(lo));
      int i1 = std::max(i0 + 1, int(std::ceil(hi)));
      i1 = std::min(i1, in);
      Contribution c{i0, {}};
      double total = hi - lo;
      for (int i = i0; i < i1; ++i) {
        double cover = std::min(hi, double(i + 1)) - std::max(lo, double(i));
        c.w.push_back(cover / total);
      }
      rows[o] = std::move(c);
    }
  } else {
    // Bilinear: two taps around the back-projected sample point.
    const double scale = double(in) / double(out);
    for (int o = 0; o < out; ++o) {
      double p = (o + 0.5) * scale - 0.5;
      int i0 = int(std::floor(p));
      double f = p - i0;
      Contribution c{0, {}};
      if (i0 < 0) {
        c = {0, {1.0}};
      } else if (i0 + 1 >= in) {
        c = {in - 1, {1.0}};
      } else {
        c = {i0, {1.0 - f, f}};
      }
      rows[o] = std::move(c);
    }
  }

  map.taps = 1;
  for (const auto& c : rows) map.taps = std::max(map.taps, int(c.w.size()));
  map.weights.assign(std::size_t(map.taps) * out, 0.0f);
  for (int o = 0; o < out; ++o) {
    int first = std::min(rows[o].first, std::max(0, in - map.taps));
    map.start[o] = first;
    int shift = rows[o].first - first;
    for (std::size_t k = 0; k < rows[o].w.size(); ++k) {
      map.weights[(k + shift) * out + o] = float(rows[o].w[k]);
    }
  }
  return map;
}

}  // namespace

Image resize_image(const Image& src, int out_w, int out_h) {
  if (src.empty()) throw Error(Errc::invalid_args, "resize of empty image");
  if (out_w < 1 || out_h < 1) throw Error(Errc::invalid_args, "resize to empty size");
  if (out_w == src.width && out_h == src.height) return src;

  const auto& ops = kernels::active();
  const int in_w = src.width;
  const int in_h = src.height;

  Image out;
  out.width = out_w;
  out.height = out_h;
  out.data.resize(std::size_t(out_w) * out_h * 3);

  AxisMap ymap, xmap;
  if (out_h != in_h) ymap = build_axis_map(in_h, out_h);
  if (out_w != in_w) xmap = build_axis_map(in_w, out_w);

  std::vector<std::uint8_t> plane_u8(std::size_t(in_w) * std::size_t(in_h));
  std::vector<float> plane(std::size_t(in_w) * in_h);
  std::vector<float> mid(std::size_t(in_w) * out_h);
  std::vector<float> final_row(std::size_t(out_w), 0.0f);
  std::vector<std::uint8_t> out_row(std::size_t(out_w), 0);

  for (int c = 0; c < 3; ++c) {
    const std::uint8_t* sp = src.data.data() + c;
    for (std::size_t i = 0; i < plane_u8.size(); ++i) plane_u8[i] = sp[i * 3];
    ops.u8_to_f32(plane_u8.data(), plane.data(), plane_u8.size());

    const float* rows = plane.data();
    if (out_h != in_h) {
      std::fill(mid.begin(), mid.end(), 0.0f);
      for (int o = 0; o < out_h; ++o) {
        float* acc = mid.data() + std::size_t(o) * in_w;
        for (int k = 0; k < ymap.taps; ++k) {
          float w = ymap.w(k, o);
          if (w == 0.0f) continue;
          ops.axpy_f32(acc, plane.data() + std::size_t(ymap.start[o] + k) * in_w,
                       w, std::size_t(in_w));
        }
      }
      rows = mid.data();
    }

    for (int o = 0; o < out_h; ++o) {
      const float* row = rows + std::size_t(o) * in_w;
      const float* result = row;
      if (out_w != in_w) {
        std::fill(final_row.begin(), final_row.end(), 0.0f);
        for (int k = 0; k < xmap.taps; ++k) {
          ops.gather_axpy_f32(final_row.data(), row + k, xmap.start.data(),
                              xmap.weights.data() + std::size_t(k) * out_w,
                              std::size_t(out_w));
        }
        result = final_row.data();
      }
      ops.f32_to_u8(result, out_row.data(), std::size_t(out_w));
      std::uint8_t* dp = out.data.data() + (std::size_t(o) * out_w) * 3 + c;
      for (int x = 0; x < out_w; ++x) dp[std::size_t(x) * 3] = out_row[x];
    }
  }
  return out;
}

}  // namespace pathnav
