#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops behind the image pipeline. Every kernel has a
// scalar reference implementation and may have SIMD variants; the variant is
// picked once at runtime. SIMD variants are bit-exact with the scalar
// reference: per output element the arithmetic and its order are identical,
// lanes only run side by side (no FMA contraction, no reordered reductions).

namespace pathnav::kernels {

struct Ops {
  const char* name;

  // acc[i] += a * x[i]
  void (*axpy_f32)(float* acc, const float* x, float a, std::size_t n);

  // acc[i] += w[i] * base[idx[i]]
  void (*gather_axpy_f32)(float* acc, const float* base,
                          const std::int32_t* idx, const float* w,
                          std::size_t n);

  void (*u8_to_f32)(const std::uint8_t* src, float* dst, std::size_t n);

  // Clamp to [0, 255], round to nearest (ties to even).
  void (*f32_to_u8)(const float* src, std::uint8_t* dst, std::size_t n);

  // Counts pixels with 65536*(max-min) > s_min_fx*max and max < v_hi,
  // i.e. HSV saturation above s_min_fx/65536 and value below v_hi/255.
  std::size_t (*tissue_count)(const std::uint8_t* r, const std::uint8_t* g,
                              const std::uint8_t* b, std::size_t n,
                              std::uint32_t s_min_fx, std::uint32_t v_hi);
};

// Kernel set in use. Resolved once: AVX2 or NEON when the CPU supports it,
// scalar otherwise; PATHNAV_NO_SIMD=1 in the environment forces scalar.
const Ops& active();

const Ops& scalar_ops();

// nullptr when the variant is unavailable on this build or CPU.
const Ops* avx2_ops();
const Ops* neon_ops();

}  // namespace pathnav::kernels
