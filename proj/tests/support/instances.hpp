#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "pliflows/error.hpp"
#include "pliflows/lqr.hpp"

namespace testsupport {

using pliflows::LqrProblem;
using pliflows::Matrix;

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

inline Matrix random_spd(std::mt19937_64& rng, std::size_t n) {
  const Matrix l = random_matrix(rng, n, n, 0.5);
  return l * l.transpose() + 0.5 * Matrix::identity(n);
}

struct Instance {
  LqrProblem prob;
  Matrix seed;  // a stabilizing gain
};

// A0 = G - (||G||_F + 0.5) I is Hurwitz, so with A = A0 + B K the gain K
// stabilizes (A, B) and seeds policy iteration.
inline Instance random_instance(std::uint64_t seed, std::size_t n, std::size_t m) {
  std::mt19937_64 rng(seed);
  const Matrix g = random_matrix(rng, n, n);
  const Matrix a0 = g - (pliflows::frobenius_norm(g) + 0.5) * Matrix::identity(n);
  const Matrix b = random_matrix(rng, n, m);
  const Matrix k = random_matrix(rng, m, n);
  const Matrix q = random_spd(rng, n);
  const Matrix r = random_spd(rng, m);
  return {LqrProblem(a0 + b * k, b, q, r, std::nullopt, k), k};
}

// Dimensions n, m in [1, max_dim] derived from the seed.
inline Instance random_instance(std::uint64_t seed, std::size_t max_dim = 5) {
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::uniform_int_distribution<std::size_t> dim(1, max_dim);
  const std::size_t n = dim(rng);
  const std::size_t m = dim(rng);
  return random_instance(seed, n, m);
}

// Stabilizing gain near `center`: perturbations shrink until A - B k is Hurwitz.
inline Matrix random_stabilizing_gain(const LqrProblem& prob, const Matrix& center,
                                      std::mt19937_64& rng, double scale = 0.5) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    const Matrix k = center + random_matrix(rng, center.rows(), center.cols(), scale);
    if (pliflows::is_stabilizing(prob, k)) return k;
    scale *= 0.8;
  }
  return center;
}

inline double rel_err(double x, double ref) { return std::fabs(x - ref) / std::max(1e-300, std::fabs(ref)); }

// Code of the pliflows::Error thrown by fn, if any.
template <class Fn>
std::optional<pliflows::Errc> thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const pliflows::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testsupport
