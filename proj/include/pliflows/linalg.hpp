#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pliflows/matrix.hpp"

namespace pliflows {

// LU factorization with partial pivoting. Used for the Kronecker-vectorized
// Lyapunov systems, which stay below 64x64 at the supported sizes.
class LuDecomposition {
 public:
  // Throws SingularSystem when a pivot falls below n * eps * max|a|.
  explicit LuDecomposition(Matrix a);

  std::vector<double> solve(std::span<const double> rhs) const;
  std::size_t dim() const noexcept { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

// Lower Cholesky factor of a symmetric matrix, or nullopt if the matrix is
// not numerically positive definite.
std::optional<Matrix> cholesky(const Matrix& s);

bool is_positive_definite(const Matrix& s);

// Solves S X = rhs for symmetric positive definite S. Throws InvalidArgument
// when S is not positive definite.
Matrix solve_spd(const Matrix& s, const Matrix& rhs);

// Numerical rank via Gaussian elimination with complete pivoting; entries
// below rel_tol * max|m| are treated as zero.
std::size_t numerical_rank(const Matrix& m, double rel_tol = 1e-8);

// Frobenius norm of M^T P + P M + W.
double lyapunov_residual(const Matrix& m, const Matrix& p, const Matrix& w);

// Solves M^T P + P M + W = 0 for symmetric P. The residual satisfies
// ||M^T P + P M + W||_F <= 1e-10 (1 + ||W||_F); the result is symmetrized.
// Throws SingularSystem when the vectorized system is singular or the
// residual bound cannot be met.
Matrix solve_lyapunov(const Matrix& m, const Matrix& w);

// For W positive definite: returns the Lyapunov solution when it is positive
// definite (equivalently, M is Hurwitz) and nullopt otherwise.
std::optional<Matrix> certified_lyapunov(const Matrix& m, const Matrix& w);

// True iff every eigenvalue of M has strictly negative real part, decided by
// positive definiteness of the solution of M^T P + P M + I = 0.
bool is_hurwitz(const Matrix& m);

struct RiccatiSolution {
  Matrix pi;     // stabilizing solution of A^T pi + pi A - pi B R^-1 B^T pi + Q = 0
  Matrix k_opt;  // R^-1 B^T pi
  int iterations = 0;
};

struct RiccatiOptions {
  int max_iterations = 200;
  double step_tol = 1e-12;
};

// Newton-Kleinman policy iteration started from a stabilizing gain. With no
// seed, k0 = 0 is used when A is Hurwitz; otherwise NoStabilizingGain.
RiccatiSolution solve_riccati(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                              const std::optional<Matrix>& k0 = std::nullopt,
                              const RiccatiOptions& options = {});

// Frobenius norm of A^T pi + pi A - pi B R^-1 B^T pi + Q.
double riccati_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                        const Matrix& pi);

}  // namespace pliflows
