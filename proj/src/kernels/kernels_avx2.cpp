#include "pliflows/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define PLIFLOWS_HAVE_AVX2_VARIANT 1
#include <immintrin.h>
#else
#define PLIFLOWS_HAVE_AVX2_VARIANT 0
#endif

namespace pliflows::kernels::avx2 {

#if PLIFLOWS_HAVE_AVX2_VARIANT

bool available() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

// Four independent accumulators; the tail goes through the scalar loop.
__attribute__((target("avx2,fma"))) double dot(const double* x, const double* y,
                                                std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc0);
  const __m128d hi = _mm256_extractf128_pd(acc0, 1);
  __m128d pair = _mm_add_pd(lo, hi);
  pair = _mm_add_sd(pair, _mm_unpackhi_pd(pair, pair));
  double sum = _mm_cvtsd_f64(pair);
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

// Multiply then add (no fused multiply-add) so results match the scalar
// reference bit for bit.
__attribute__((target("avx2"))) void axpy(double alpha, const double* x, double* y,
                                          std::size_t n) noexcept {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(a, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

__attribute__((target("avx2,fma"))) double scaled_error_sq(const double* err, const double* y0,
                                                            const double* y1, std::size_t n,
                                                            double atol, double rtol) noexcept {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d va = _mm256_set1_pd(atol);
  const __m256d vr = _mm256_set1_pd(rtol);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(y0 + i));
    const __m256d a1 = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(y1 + i));
    const __m256d scale = _mm256_add_pd(va, _mm256_mul_pd(vr, _mm256_max_pd(a0, a1)));
    const __m256d e = _mm256_div_pd(_mm256_loadu_pd(err + i), scale);
    acc = _mm256_fmadd_pd(e, e, acc);
  }
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d pair = _mm_add_pd(lo, hi);
  pair = _mm_add_sd(pair, _mm_unpackhi_pd(pair, pair));
  double sum = _mm_cvtsd_f64(pair);
  if (i < n) sum += scalar::scaled_error_sq(err + i, y0 + i, y1 + i, n - i, atol, rtol);
  return sum;
}

#else

bool available() noexcept { return false; }
double dot(const double* x, const double* y, std::size_t n) noexcept {
  return scalar::dot(x, y, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  scalar::axpy(alpha, x, y, n);
}
double scaled_error_sq(const double* err, const double* y0, const double* y1, std::size_t n,
                       double atol, double rtol) noexcept {
  return scalar::scaled_error_sq(err, y0, y1, n, atol, rtol);
}

#endif

}  // namespace pliflows::kernels::avx2
