#include "pathnav/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace pathnav::kernels {

namespace {

// Vector bodies mirror the scalar reference element for element; reductions
// and tails fall back to the same scalar arithmetic.

void axpy_f32_avx2(float* acc, const float* x, float a, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vacc = _mm256_loadu_ps(acc + i);
    __m256 vx = _mm256_loadu_ps(x + i);
    vacc = _mm256_add_ps(vacc, _mm256_mul_ps(va, vx));
    _mm256_storeu_ps(acc + i, vacc);
  }
  for (; i < n; ++i) acc[i] += a * x[i];
}

void gather_axpy_f32_avx2(float* acc, const float* base,
                          const std::int32_t* idx, const float* w,
                          std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i vidx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(idx + i));
    __m256 vsrc = _mm256_i32gather_ps(base, vidx, 4);
    __m256 vw = _mm256_loadu_ps(w + i);
    __m256 vacc = _mm256_loadu_ps(acc + i);
    vacc = _mm256_add_ps(vacc, _mm256_mul_ps(vw, vsrc));
    _mm256_storeu_ps(acc + i, vacc);
  }
  for (; i < n; ++i) acc[i] += w[i] * base[idx[i]];
}

void u8_to_f32_avx2(const std::uint8_t* src, float* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + i));
    __m256i ints = _mm256_cvtepu8_epi32(bytes);
    _mm256_storeu_ps(dst + i, _mm256_cvtepi32_ps(ints));
  }
  for (; i < n; ++i) dst[i] = float(src[i]);
}

void f32_to_u8_avx2(const float* src, std::uint8_t* dst, std::size_t n) {
  const __m256 lo = _mm256_setzero_ps();
  const __m256 hi = _mm256_set1_ps(255.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(src + i);
    v = _mm256_min_ps(_mm256_max_ps(v, lo), hi);
    __m256i ints = _mm256_cvtps_epi32(v);  // nearest even, as lrintf
    __m128i a = _mm256_castsi256_si128(ints);
    __m128i b = _mm256_extracti128_si256(ints, 1);
    __m128i packed16 = _mm_packus_epi32(a, b);
    __m128i packed8 = _mm_packus_epi16(packed16, packed16);
    _mm_storel_epi64(reinterpret_cast<__m128i*>(dst + i), packed8);
  }
  scalar_ops().f32_to_u8(src + i, dst + i, n - i);
}

std::size_t tissue_count_avx2(const std::uint8_t* r, const std::uint8_t* g,
                              const std::uint8_t* b, std::size_t n,
                              std::uint32_t s_min_fx, std::uint32_t v_hi) {
  const __m256i vfx = _mm256_set1_epi32(int(s_min_fx));
  const __m256i vhi = _mm256_set1_epi32(int(v_hi));
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i vr = _mm256_cvtepu8_epi32(
        _mm_loadl_epi64(reinterpret_cast<const __m128i*>(r + i)));
    __m256i vg = _mm256_cvtepu8_epi32(
        _mm_loadl_epi64(reinterpret_cast<const __m128i*>(g + i)));
    __m256i vb = _mm256_cvtepu8_epi32(
        _mm_loadl_epi64(reinterpret_cast<const __m128i*>(b + i)));
    __m256i maxc = _mm256_max_epi32(vr, _mm256_max_epi32(vg, vb));
    __m256i minc = _mm256_min_epi32(vr, _mm256_min_epi32(vg, vb));
    __m256i lhs = _mm256_slli_epi32(_mm256_sub_epi32(maxc, minc), 16);
    __m256i rhs = _mm256_mullo_epi32(vfx, maxc);
    __m256i sat = _mm256_cmpgt_epi32(lhs, rhs);
    __m256i val = _mm256_cmpgt_epi32(vhi, maxc);
    int mask = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_and_si256(sat, val)));
    count += std::size_t(__builtin_popcount(unsigned(mask)));
  }
  count += scalar_ops().tissue_count(r + i, g + i, b + i, n - i, s_min_fx, v_hi);
  return count;
}

const Ops kAvx2 = {
    "avx2",         axpy_f32_avx2, gather_axpy_f32_avx2,
    u8_to_f32_avx2, f32_to_u8_avx2, tissue_count_avx2,
};

}  // namespace

const Ops* avx2_ops() {
  return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
}

}  // namespace pathnav::kernels

#else

namespace pathnav::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace pathnav::kernels

#endif
