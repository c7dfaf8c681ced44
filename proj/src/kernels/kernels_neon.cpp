#include "pathnav/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace pathnav::kernels {

namespace {

// Explicit mul-then-add (no vmla/fma) so rounding matches the scalar path.

void axpy_f32_neon(float* acc, const float* x, float a, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t vacc = vld1q_f32(acc + i);
    float32x4_t vx = vld1q_f32(x + i);
    vacc = vaddq_f32(vacc, vmulq_f32(va, vx));
    vst1q_f32(acc + i, vacc);
  }
  for (; i < n; ++i) acc[i] += a * x[i];
}

void gather_axpy_f32_neon(float* acc, const float* base,
                          const std::int32_t* idx, const float* w,
                          std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t vsrc = {base[idx[i]], base[idx[i + 1]], base[idx[i + 2]],
                        base[idx[i + 3]]};
    float32x4_t vw = vld1q_f32(w + i);
    float32x4_t vacc = vld1q_f32(acc + i);
    vacc = vaddq_f32(vacc, vmulq_f32(vw, vsrc));
    vst1q_f32(acc + i, vacc);
  }
  for (; i < n; ++i) acc[i] += w[i] * base[idx[i]];
}

void u8_to_f32_neon(const std::uint8_t* src, float* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    uint8x8_t bytes = vld1_u8(src + i);
    uint16x8_t half = vmovl_u8(bytes);
    vst1q_f32(dst + i, vcvtq_f32_u32(vmovl_u16(vget_low_u16(half))));
    vst1q_f32(dst + i + 4, vcvtq_f32_u32(vmovl_u16(vget_high_u16(half))));
  }
  for (; i < n; ++i) dst[i] = float(src[i]);
}

void f32_to_u8_neon(const float* src, std::uint8_t* dst, std::size_t n) {
  const float32x4_t lo = vdupq_n_f32(0.0f);
  const float32x4_t hi = vdupq_n_f32(255.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    float32x4_t a = vminq_f32(vmaxq_f32(vld1q_f32(src + i), lo), hi);
    float32x4_t b = vminq_f32(vmaxq_f32(vld1q_f32(src + i + 4), lo), hi);
    int32x4_t ia = vcvtnq_s32_f32(a);  // nearest even, as lrintf
    int32x4_t ib = vcvtnq_s32_f32(b);
    uint16x8_t half = vcombine_u16(vqmovun_s32(ia), vqmovun_s32(ib));
    vst1_u8(dst + i, vqmovn_u16(half));
  }
  scalar_ops().f32_to_u8(src + i, dst + i, n - i);
}

std::size_t tissue_count_neon(const std::uint8_t* r, const std::uint8_t* g,
                              const std::uint8_t* b, std::size_t n,
                              std::uint32_t s_min_fx, std::uint32_t v_hi) {
  const uint32x4_t vfx = vdupq_n_u32(s_min_fx);
  const uint32x4_t vhi = vdupq_n_u32(v_hi);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    uint32x4_t vr = {r[i], r[i + 1], r[i + 2], r[i + 3]};
    uint32x4_t vg = {g[i], g[i + 1], g[i + 2], g[i + 3]};
    uint32x4_t vb = {b[i], b[i + 1], b[i + 2], b[i + 3]};
    uint32x4_t maxc = vmaxq_u32(vr, vmaxq_u32(vg, vb));
    uint32x4_t minc = vminq_u32(vr, vminq_u32(vg, vb));
    uint32x4_t lhs = vshlq_n_u32(vsubq_u32(maxc, minc), 16);
    uint32x4_t rhs = vmulq_u32(vfx, maxc);
    uint32x4_t hit = vandq_u32(vcgtq_u32(lhs, rhs), vcltq_u32(maxc, vhi));
    count += vaddvq_u32(vshrq_n_u32(hit, 31));
  }
  count += scalar_ops().tissue_count(r + i, g + i, b + i, n - i, s_min_fx, v_hi);
  return count;
}

const Ops kNeon = {
    "neon",         axpy_f32_neon, gather_axpy_f32_neon,
    u8_to_f32_neon, f32_to_u8_neon, tissue_count_neon,
};

}  // namespace

const Ops* neon_ops() { return &kNeon; }

}  // namespace pathnav::kernels

#else

namespace pathnav::kernels {
const Ops* neon_ops() { return nullptr; }
}  // namespace pathnav::kernels

#endif
