#include "pliflows/kernels.hpp"

#if defined(__aarch64__)
#define PLIFLOWS_HAVE_NEON_VARIANT 1
#include <arm_neon.h>
#else
#define PLIFLOWS_HAVE_NEON_VARIANT 0
#endif

namespace pliflows::kernels::neon {

#if PLIFLOWS_HAVE_NEON_VARIANT

// Advanced SIMD is mandatory on AArch64.
bool available() noexcept { return true; }

double dot(const double* x, const double* y, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(a, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double scaled_error_sq(const double* err, const double* y0, const double* y1, std::size_t n,
                       double atol, double rtol) noexcept {
  const float64x2_t va = vdupq_n_f64(atol);
  const float64x2_t vr = vdupq_n_f64(rtol);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t m = vmaxq_f64(vabsq_f64(vld1q_f64(y0 + i)), vabsq_f64(vld1q_f64(y1 + i)));
    const float64x2_t e = vdivq_f64(vld1q_f64(err + i), vaddq_f64(va, vmulq_f64(vr, m)));
    acc = vfmaq_f64(acc, e, e);
  }
  double sum = vaddvq_f64(acc);
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

}  // namespace pliflows::kernels::neon
