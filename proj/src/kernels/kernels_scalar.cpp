#include <algorithm>
#include <cmath>

#include "pliflows/kernels.hpp"

namespace pliflows::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double scaled_error_sq(const double* err, const double* y0, const double* y1, std::size_t n,
                       double atol, double rtol) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = atol + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    const double e = err[i] / scale;
    sum += e * e;
  }
  return sum;
}

}  // namespace pliflows::kernels::scalar
