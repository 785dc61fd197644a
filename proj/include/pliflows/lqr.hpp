#pragma once

#include <memory>
#include <optional>

#include "pliflows/linalg.hpp"
#include "pliflows/matrix.hpp"

namespace pliflows {

// Continuous-time LQR instance  xdot = A x + B u,  cost E[ int x'Qx + u'Ru ],
// with x0 drawn from a distribution of covariance Sigma0. Immutable; the
// Riccati optimum is computed once at construction and shared by copies.
class LqrProblem {
 public:
  // seed_gain: a stabilizing gain used to start policy iteration. Without it
  // the optimum is only available when A is Hurwitz.
  LqrProblem(Matrix a, Matrix b, Matrix q, Matrix r, std::optional<Matrix> sigma0 = std::nullopt,
             std::optional<Matrix> seed_gain = std::nullopt);

  // xdot = u, q = r = 1 (loss (1+k^2)/(2k), optimum k = 1).
  static LqrProblem integrator();
  // n = m = 2, A = 0, B = Q = R = I (optimum k = I).
  static LqrProblem planar_zero();
  // xdot = a x + b u with scalar costs q, r.
  static LqrProblem scalar(double a, double b = 1.0, double q = 1.0, double r = 1.0);

  const Matrix& A() const noexcept { return a_; }
  const Matrix& B() const noexcept { return b_; }
  const Matrix& Q() const noexcept { return q_; }
  const Matrix& R() const noexcept { return r_; }
  const Matrix& Sigma0() const noexcept { return sigma0_; }
  std::size_t n() const noexcept { return a_.rows(); }
  std::size_t m() const noexcept { return b_.cols(); }

  bool has_optimum() const noexcept;
  // Throws the error policy iteration raised if no optimum is available.
  const RiccatiSolution& optimum() const;
  double optimal_loss() const;

  Matrix closed_loop(const Matrix& k) const;

 private:
  struct Optimum;

  Matrix a_, b_, q_, r_, sigma0_;
  std::shared_ptr<const Optimum> optimum_;
};

// Everything the flows need at one gain, from two Lyapunov solves.
struct GainEvaluation {
  double loss = 0.0;
  Matrix p;  // (A-Bk)'P + P(A-Bk) + Q + k'Rk = 0
  Matrix y;  // (A-Bk)Y + Y(A-Bk)' + Sigma0 = 0
  Matrix gradient;
};

// Throws NotStabilizing unless A - Bk is Hurwitz.
GainEvaluation evaluate(const LqrProblem& prob, const Matrix& k);

bool is_stabilizing(const LqrProblem& prob, const Matrix& k);

// tr(P Sigma0).
double loss(const LqrProblem& prob, const Matrix& k);

// 2 (Rk - B'P) Y.
Matrix gradient(const LqrProblem& prob, const Matrix& k);

// 2 (Rk - B'P): the gradient in the metric induced by Y.
Matrix natural_gradient_direction(const LqrProblem& prob, const Matrix& k);

// k - R^-1 B'P: displacement from the policy-improvement target.
Matrix gauss_newton_direction(const LqrProblem& prob, const Matrix& k);

// loss(k) - loss(k_opt), clamped to 0 when within 1e-12.
double regret(const LqrProblem& prob, const Matrix& k);
double regret_from_loss(const LqrProblem& prob, double loss_value);

}  // namespace pliflows
