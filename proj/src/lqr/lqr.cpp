#include "pliflows/lqr.hpp"

#include <cmath>
#include <variant>

#include "pliflows/error.hpp"

namespace pliflows {

struct LqrProblem::Optimum {
  std::variant<RiccatiSolution, Error> result;
  double loss = 0.0;
};

LqrProblem::LqrProblem(Matrix a, Matrix b, Matrix q, Matrix r, std::optional<Matrix> sigma0,
                       std::optional<Matrix> seed_gain)
    : a_(std::move(a)), b_(std::move(b)), q_(std::move(q)), r_(std::move(r)) {
  require_square(a_, "LqrProblem A");
  const std::size_t n = a_.rows();
  if (n == 0 || b_.rows() != n || b_.cols() == 0) {
    throw Error(Errc::dimension_mismatch, "LqrProblem: B must be n x m with n = rows(A)");
  }
  if (q_.rows() != n || q_.cols() != n) throw Error(Errc::dimension_mismatch, "LqrProblem: Q");
  if (r_.rows() != b_.cols() || r_.cols() != b_.cols()) {
    throw Error(Errc::dimension_mismatch, "LqrProblem: R must be m x m");
  }
  sigma0_ = sigma0 ? std::move(*sigma0) : Matrix::identity(n);
  if (sigma0_.rows() != n || sigma0_.cols() != n) {
    throw Error(Errc::dimension_mismatch, "LqrProblem: Sigma0 must be n x n");
  }
  for (const Matrix* m : {&a_, &b_, &q_, &r_, &sigma0_}) {
    if (!m->all_finite()) throw Error(Errc::invalid_argument, "LqrProblem: non-finite entry");
  }
  auto is_symmetric = [](const Matrix& s) {
    return frobenius_norm(s - s.transpose()) <= 1e-12 * (1.0 + frobenius_norm(s));
  };
  if (!is_symmetric(q_) || !is_positive_definite(q_)) {
    throw Error(Errc::invalid_argument, "LqrProblem: Q must be symmetric positive definite");
  }
  if (!is_symmetric(r_) || !is_positive_definite(r_)) {
    throw Error(Errc::invalid_argument, "LqrProblem: R must be symmetric positive definite");
  }
  if (!is_symmetric(sigma0_) || !is_positive_definite(sigma0_)) {
    throw Error(Errc::invalid_argument, "LqrProblem: Sigma0 must be symmetric positive definite");
  }

  auto optimum = std::make_shared<Optimum>(Optimum{Error(Errc::no_stabilizing_gain, "unset"), 0.0});
  try {
    RiccatiSolution sol = solve_riccati(a_, b_, q_, r_, seed_gain);
    optimum->loss = frobenius_inner(sol.pi, sigma0_);
    optimum->result = std::move(sol);
  } catch (const Error& e) {
    if (e.code() != Errc::no_stabilizing_gain && e.code() != Errc::not_converged) throw;
    optimum->result = e;
  }
  optimum_ = std::move(optimum);
}

LqrProblem LqrProblem::integrator() { return scalar(0.0); }

LqrProblem LqrProblem::planar_zero() {
  return LqrProblem(Matrix(2, 2), Matrix::identity(2), Matrix::identity(2), Matrix::identity(2),
                    std::nullopt, Matrix::identity(2) * 2.0);
}

LqrProblem LqrProblem::scalar(double a, double b, double q, double r) {
  if (b == 0.0) throw Error(Errc::invalid_argument, "scalar problem needs b != 0");
  // a - b k = -(|a| + 1) is a stabilizing seed.
  const double seed = (a + std::fabs(a) + 1.0) / b;
  return LqrProblem(Matrix::scalar(a), Matrix::scalar(b), Matrix::scalar(q), Matrix::scalar(r),
                    std::nullopt, Matrix::scalar(seed));
}

bool LqrProblem::has_optimum() const noexcept {
  return std::holds_alternative<RiccatiSolution>(optimum_->result);
}

const RiccatiSolution& LqrProblem::optimum() const {
  if (const auto* err = std::get_if<Error>(&optimum_->result)) throw *err;
  return std::get<RiccatiSolution>(optimum_->result);
}

double LqrProblem::optimal_loss() const {
  optimum();
  return optimum_->loss;
}

Matrix LqrProblem::closed_loop(const Matrix& k) const {
  if (k.rows() != m() || k.cols() != n()) {
    throw Error(Errc::dimension_mismatch, "gain must be " + std::to_string(m()) + "x" +
                                              std::to_string(n()) + ", got " + shape_string(k));
  }
  return a_ - b_ * k;
}

namespace {

// Positive definiteness of P certifies A - Bk Hurwitz because Q + k'Rk > 0.
Matrix cost_to_go(const LqrProblem& prob, const Matrix& closed, const Matrix& k) {
  auto p = certified_lyapunov(closed, prob.Q() + k.transpose() * prob.R() * k);
  if (!p) throw Error(Errc::not_stabilizing, "A - Bk is not Hurwitz");
  return std::move(*p);
}

Matrix state_covariance(const LqrProblem& prob, const Matrix& closed) {
  auto y = certified_lyapunov(closed.transpose(), prob.Sigma0());
  if (!y) throw Error(Errc::not_stabilizing, "A - Bk is not Hurwitz");
  return std::move(*y);
}

}  // namespace

GainEvaluation evaluate(const LqrProblem& prob, const Matrix& k) {
  if (!k.all_finite()) throw Error(Errc::not_stabilizing, "gain has non-finite entries");
  const Matrix closed = prob.closed_loop(k);
  GainEvaluation ev;
  ev.p = cost_to_go(prob, closed, k);
  ev.y = state_covariance(prob, closed);
  ev.loss = frobenius_inner(ev.p, prob.Sigma0());
  ev.gradient = 2.0 * ((prob.R() * k - prob.B().transpose() * ev.p) * ev.y);
  return ev;
}

bool is_stabilizing(const LqrProblem& prob, const Matrix& k) {
  return k.all_finite() && is_hurwitz(prob.closed_loop(k));
}

double loss(const LqrProblem& prob, const Matrix& k) {
  if (!k.all_finite()) throw Error(Errc::not_stabilizing, "gain has non-finite entries");
  return frobenius_inner(cost_to_go(prob, prob.closed_loop(k), k), prob.Sigma0());
}

Matrix gradient(const LqrProblem& prob, const Matrix& k) { return evaluate(prob, k).gradient; }

Matrix natural_gradient_direction(const LqrProblem& prob, const Matrix& k) {
  const Matrix p = cost_to_go(prob, prob.closed_loop(k), k);
  return 2.0 * (prob.R() * k - prob.B().transpose() * p);
}

Matrix gauss_newton_direction(const LqrProblem& prob, const Matrix& k) {
  const Matrix p = cost_to_go(prob, prob.closed_loop(k), k);
  return k - solve_spd(prob.R(), prob.B().transpose() * p);
}

double regret_from_loss(const LqrProblem& prob, double loss_value) {
  const double r = loss_value - prob.optimal_loss();
  return std::fabs(r) <= 1e-12 ? 0.0 : r;
}

double regret(const LqrProblem& prob, const Matrix& k) {
  return regret_from_loss(prob, loss(prob, k));
}

}  // namespace pliflows
