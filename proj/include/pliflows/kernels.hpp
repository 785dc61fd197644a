#pragma once

// Data-parallel inner loops used by the dense linear algebra and by the
// Runge-Kutta state updates. Each kernel has a scalar reference version and
// vectorized variants; the active variant is chosen once at startup from the
// CPU features and the PLIFLOWS_SIMD environment variable
// ("auto", "scalar", "avx2", "neon").

#include <cstddef>
#include <span>
#include <string_view>

namespace pliflows::kernels {

enum class Path { scalar, avx2, neon };

std::string_view name(Path path) noexcept;

// True when the variant was compiled in and the running CPU supports it.
bool supported(Path path) noexcept;

Path active_path() noexcept;

// Switches the dispatch table. Returns false (and leaves the table alone)
// when the path is not supported.
bool select(Path path) noexcept;

// sum_i x[i] * y[i]
double dot(std::span<const double> x, std::span<const double> y) noexcept;

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

// sum_i (err[i] / (atol + rtol * max(|y0[i]|, |y1[i]|)))^2
double scaled_error_sq(std::span<const double> err, std::span<const double> y0,
                       std::span<const double> y1, double atol, double rtol) noexcept;

// The individual variants, exposed for equivalence tests.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double scaled_error_sq(const double* err, const double* y0, const double* y1, std::size_t n,
                       double atol, double rtol) noexcept;
}  // namespace scalar

namespace avx2 {
bool available() noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double scaled_error_sq(const double* err, const double* y0, const double* y1, std::size_t n,
                       double atol, double rtol) noexcept;
}  // namespace avx2

namespace neon {
bool available() noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double scaled_error_sq(const double* err, const double* y0, const double* y1, std::size_t n,
                       double atol, double rtol) noexcept;
}  // namespace neon

}  // namespace pliflows::kernels
