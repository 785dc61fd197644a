#include <atomic>
#include <cstdlib>
#include <string_view>

#include "pliflows/kernels.hpp"

namespace pliflows::kernels {
namespace {

struct Table {
  Path path;
  double (*dot)(const double*, const double*, std::size_t) noexcept;
  void (*axpy)(double, const double*, double*, std::size_t) noexcept;
  double (*scaled_error_sq)(const double*, const double*, const double*, std::size_t, double,
                            double) noexcept;
};

constexpr Table kScalar{Path::scalar, &scalar::dot, &scalar::axpy, &scalar::scaled_error_sq};
constexpr Table kAvx2{Path::avx2, &avx2::dot, &avx2::axpy, &avx2::scaled_error_sq};
constexpr Table kNeon{Path::neon, &neon::dot, &neon::axpy, &neon::scaled_error_sq};

const Table* table_for(Path path) noexcept {
  switch (path) {
    case Path::avx2: return &kAvx2;
    case Path::neon: return &kNeon;
    case Path::scalar: break;
  }
  return &kScalar;
}

const Table* initial_table() noexcept {
  const char* env = std::getenv("PLIFLOWS_SIMD");
  const std::string_view request = env ? env : "auto";
  if (request == "scalar") return &kScalar;
  if (request == "avx2" && avx2::available()) return &kAvx2;
  if (request == "neon" && neon::available()) return &kNeon;
  if (avx2::available()) return &kAvx2;
  if (neon::available()) return &kNeon;
  return &kScalar;
}

std::atomic<const Table*>& active() noexcept {
  static std::atomic<const Table*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view name(Path path) noexcept {
  switch (path) {
    case Path::avx2: return "avx2";
    case Path::neon: return "neon";
    case Path::scalar: break;
  }
  return "scalar";
}

bool supported(Path path) noexcept {
  switch (path) {
    case Path::avx2: return avx2::available();
    case Path::neon: return neon::available();
    case Path::scalar: break;
  }
  return true;
}

Path active_path() noexcept { return active().load(std::memory_order_relaxed)->path; }

bool select(Path path) noexcept {
  if (!supported(path)) return false;
  active().store(table_for(path), std::memory_order_relaxed);
  return true;
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return active().load(std::memory_order_relaxed)->dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  active().load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

double scaled_error_sq(std::span<const double> err, std::span<const double> y0,
                       std::span<const double> y1, double atol, double rtol) noexcept {
  return active().load(std::memory_order_relaxed)
      ->scaled_error_sq(err.data(), y0.data(), y1.data(), err.size(), atol, rtol);
}

}  // namespace pliflows::kernels
