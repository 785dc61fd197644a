#include "pliflows/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pliflows/error.hpp"
#include "pliflows/kernels.hpp"

namespace pliflows {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronecker form of X -> M^T X + X M acting on row-major vec(X).
Matrix lyapunov_operator(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix k(n * n, n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i * n + j;
      for (std::size_t l = 0; l < n; ++l) {
        k(row, l * n + j) += m(l, i);
        k(row, i * n + l) += m(l, j);
      }
    }
  }
  return k;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = kernels::dot(a.row(i), x);
  return y;
}

}  // namespace

LuDecomposition::LuDecomposition(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
  require_square(lu_, "LuDecomposition");
  const std::size_t n = lu_.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double threshold = static_cast<double>(n) * kEps * std::max(max_abs(lu_), 1e-300);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(lu_(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(lu_(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > threshold)) {
      throw Error(Errc::singular_system, "pivot " + std::to_string(best) + " in column " +
                                             std::to_string(col) + " below threshold");
    }
    if (pivot != col) {
      std::swap_ranges(lu_.row(col).begin(), lu_.row(col).end(), lu_.row(pivot).begin());
      std::swap(perm_[col], perm_[pivot]);
    }
    const double inv = 1.0 / lu_(col, col);
    const auto pivot_tail = lu_.row(col).subspan(col + 1);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = lu_(r, col) * inv;
      lu_(r, col) = factor;
      if (factor != 0.0) kernels::axpy(-factor, pivot_tail, lu_.row(r).subspan(col + 1));
    }
  }
}

std::vector<double> LuDecomposition::solve(std::span<const double> rhs) const {
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) throw Error(Errc::dimension_mismatch, "LuDecomposition::solve rhs size");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    x[i] -= kernels::dot(lu_.row(i).first(i), std::span<const double>(x).first(i));
  }
  for (std::size_t ii = n; ii-- > 0;) {
    const auto tail = lu_.row(ii).subspan(ii + 1);
    x[ii] = (x[ii] - kernels::dot(tail, std::span<const double>(x).subspan(ii + 1))) / lu_(ii, ii);
  }
  return x;
}

std::optional<Matrix> cholesky(const Matrix& s) {
  require_square(s, "cholesky");
  const std::size_t n = s.rows();
  Matrix l(n, n);
  const double scale = std::max(max_abs(s), 1e-300);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j) - kernels::dot(l.row(j).first(j), l.row(j).first(j));
    if (!(d > static_cast<double>(n) * kEps * scale)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      l(i, j) = (s(i, j) - kernels::dot(l.row(i).first(j), l.row(j).first(j))) / ljj;
    }
  }
  return l;
}

bool is_positive_definite(const Matrix& s) {
  return s.square() && s.all_finite() && cholesky(symmetrized(s)).has_value();
}

Matrix solve_spd(const Matrix& s, const Matrix& rhs) {
  if (s.rows() != rhs.rows()) throw Error(Errc::dimension_mismatch, "solve_spd shapes");
  const auto l = cholesky(symmetrized(s));
  if (!l) throw Error(Errc::invalid_argument, "solve_spd: matrix is not positive definite");
  const std::size_t n = s.rows();
  Matrix x = rhs;
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, c);
      for (std::size_t k = 0; k < i; ++k) v -= (*l)(i, k) * x(k, c);
      x(i, c) = v / (*l)(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double v = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) v -= (*l)(k, ii) * x(k, c);
      x(ii, c) = v / (*l)(ii, ii);
    }
  }
  return x;
}

std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  Matrix a = m;
  const double tol = rel_tol * max_abs(m);
  std::size_t rank = 0;
  const std::size_t steps = std::min(a.rows(), a.cols());
  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < a.rows(); ++i)
      for (std::size_t j = k; j < a.cols(); ++j)
        if (std::fabs(a(i, j)) > best) {
          best = std::fabs(a(i, j));
          pr = i;
          pc = j;
        }
    if (best <= tol || best == 0.0) break;
    ++rank;
    if (pr != k) std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(pr).begin());
    if (pc != k)
      for (std::size_t i = 0; i < a.rows(); ++i) std::swap(a(i, k), a(i, pc));
    for (std::size_t i = k + 1; i < a.rows(); ++i) {
      const double factor = a(i, k) / a(k, k);
      for (std::size_t j = k; j < a.cols(); ++j) a(i, j) -= factor * a(k, j);
    }
  }
  return rank;
}

double lyapunov_residual(const Matrix& m, const Matrix& p, const Matrix& w) {
  return frobenius_norm(m.transpose() * p + p * m + w);
}

Matrix solve_lyapunov(const Matrix& m, const Matrix& w) {
  require_square(m, "solve_lyapunov");
  require_same_shape(m, w, "solve_lyapunov");
  if (!m.all_finite() || !w.all_finite()) {
    throw Error(Errc::invalid_argument, "solve_lyapunov: non-finite input");
  }
  const std::size_t n = m.rows();
  const Matrix op = lyapunov_operator(m);
  const LuDecomposition lu(op);

  std::vector<double> rhs(w.data().begin(), w.data().end());
  for (double& v : rhs) v = -v;
  std::vector<double> x = lu.solve(rhs);

  const double bound = 1e-10 * (1.0 + frobenius_norm(w));
  Matrix p;
  for (int refine = 0;; ++refine) {
    p = symmetrized(Matrix(n, n, x));
    const double residual = lyapunov_residual(m, p, w);
    if (residual <= bound) break;
    if (!std::isfinite(residual) || refine == 2) {
      throw Error(Errc::singular_system,
                  "Lyapunov residual " + std::to_string(residual) + " exceeds bound");
    }
    // One step of iterative refinement on the vectorized system.
    std::vector<double> r = matvec(op, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = -(r[i] - rhs[i]);
    const std::vector<double> dx = lu.solve(r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
  }
  return p;
}

std::optional<Matrix> certified_lyapunov(const Matrix& m, const Matrix& w) {
  try {
    Matrix p = solve_lyapunov(m, w);
    if (!cholesky(p)) return std::nullopt;
    return p;
  } catch (const Error& e) {
    if (e.code() == Errc::singular_system) return std::nullopt;
    throw;
  }
}

bool is_hurwitz(const Matrix& m) {
  if (!m.square() || m.empty() || !m.all_finite()) return false;
  return certified_lyapunov(m, Matrix::identity(m.rows())).has_value();
}

double riccati_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                        const Matrix& pi) {
  const Matrix bt_pi = b.transpose() * pi;
  return frobenius_norm(a.transpose() * pi + pi * a - bt_pi.transpose() * solve_spd(r, bt_pi) + q);
}

RiccatiSolution solve_riccati(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                              const std::optional<Matrix>& k0, const RiccatiOptions& options) {
  require_square(a, "solve_riccati A");
  require_square(q, "solve_riccati Q");
  require_square(r, "solve_riccati R");
  if (b.rows() != a.rows() || q.rows() != a.rows() || r.rows() != b.cols()) {
    throw Error(Errc::dimension_mismatch, "solve_riccati: inconsistent A, B, Q, R");
  }
  if (!is_positive_definite(q)) throw Error(Errc::invalid_argument, "Q must be positive definite");
  if (!is_positive_definite(r)) throw Error(Errc::invalid_argument, "R must be positive definite");

  Matrix k;
  if (k0) {
    if (k0->rows() != b.cols() || k0->cols() != a.rows()) {
      throw Error(Errc::dimension_mismatch, "solve_riccati: seed gain has wrong shape");
    }
    k = *k0;
  } else {
    k = Matrix(b.cols(), a.rows());
  }
  if (!is_hurwitz(a - b * k)) {
    throw Error(Errc::no_stabilizing_gain,
                k0 ? "seed gain does not stabilize (A, B)" : "A is not Hurwitz and no seed given");
  }

  const Matrix bt = b.transpose();
  double previous_step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Matrix p = solve_lyapunov(a - b * k, q + k.transpose() * r * k);
    Matrix next = solve_spd(r, bt * p);
    const double step = frobenius_norm(next - k);
    const bool converged = step <= options.step_tol * (1.0 + frobenius_norm(k));
    // Past the quadratic phase the step can stall at rounding level; accept
    // it there provided the Riccati residual already meets its bound.
    const bool stalled = it > 3 && step >= previous_step &&
                         riccati_residual(a, b, q, r, p) <= 1e-9 * (1.0 + frobenius_norm(q));
    if (converged || stalled) {
      RiccatiSolution sol{p, std::move(next), it};
      if (riccati_residual(a, b, q, r, sol.pi) > 1e-9 * (1.0 + frobenius_norm(q)) ||
          !is_hurwitz(a - b * sol.k_opt)) {
        throw Error(Errc::not_converged, "policy iteration ended without a valid solution");
      }
      return sol;
    }
    previous_step = step;
    k = std::move(next);
  }
  throw Error(Errc::not_converged,
              "policy iteration did not converge in " + std::to_string(options.max_iterations) +
                  " iterations");
}

}  // namespace pliflows
