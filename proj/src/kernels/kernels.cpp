#include "pathnav/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace pathnav::kernels {

namespace {

void axpy_f32_scalar(float* acc, const float* x, float a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a * x[i];
}

void gather_axpy_f32_scalar(float* acc, const float* base,
                            const std::int32_t* idx, const float* w,
                            std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += w[i] * base[idx[i]];
}

void u8_to_f32_scalar(const std::uint8_t* src, float* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = float(src[i]);
}

void f32_to_u8_scalar(const float* src, std::uint8_t* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    float v = std::min(std::max(src[i], 0.0f), 255.0f);
    dst[i] = std::uint8_t(std::lrintf(v));
  }
}

std::size_t tissue_count_scalar(const std::uint8_t* r, const std::uint8_t* g,
                                const std::uint8_t* b, std::size_t n,
                                std::uint32_t s_min_fx, std::uint32_t v_hi) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t maxc = std::max(r[i], std::max(g[i], b[i]));
    std::uint32_t minc = std::min(r[i], std::min(g[i], b[i]));
    if (((maxc - minc) << 16) > s_min_fx * maxc && maxc < v_hi) ++count;
  }
  return count;
}

const Ops kScalar = {
    "scalar",           axpy_f32_scalar, gather_axpy_f32_scalar,
    u8_to_f32_scalar,   f32_to_u8_scalar, tissue_count_scalar,
};

const Ops& pick() {
  const char* off = std::getenv("PATHNAV_NO_SIMD");
  if (off != nullptr && off[0] != '\0' && off[0] != '0') return kScalar;
  if (const Ops* ops = avx2_ops()) return *ops;
  if (const Ops* ops = neon_ops()) return *ops;
  return kScalar;
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

const Ops& active() {
  static const Ops& chosen = pick();
  return chosen;
}

}  // namespace pathnav::kernels
