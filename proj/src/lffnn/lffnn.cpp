#include "pliflows/lffnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pliflows/error.hpp"
#include "pliflows/scalar_models.hpp"

namespace pliflows {
namespace {

std::vector<Matrix> imbalance_matrices(const FlowState& state) {
  return imbalance(std::get<FactoredGain>(state)).matrices;
}

template <class Fn>
double max_deviation(const Trajectory& traj, Fn&& scale) {
  if (!traj.factored()) {
    throw Error(Errc::not_factored, "conservation check needs a factored trajectory");
  }
  if (traj.states.empty()) return 0.0;
  const std::vector<Matrix> c0 = imbalance_matrices(traj.states.front());
  double worst = 0.0;
  for (const FlowState& s : traj.states) {
    const std::vector<Matrix> c = imbalance_matrices(s);
    for (std::size_t i = 0; i < c.size(); ++i) {
      worst = std::max(worst, frobenius_norm(c[i] - c0[i]) / scale(c0[i]));
    }
  }
  return worst;
}

double spacing(const std::vector<double>& v) {
  double h = std::numeric_limits<double>::infinity();
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[i - 1]) h = std::min(h, s[i] - s[i - 1]);
  }
  return h;
}

}  // namespace

double conservation_deviation(const Trajectory& traj) {
  return max_deviation(traj, [](const Matrix&) { return 1.0; });
}

double conservation_relative_deviation(const Trajectory& traj) {
  return max_deviation(traj, [](const Matrix& c) { return 1.0 + frobenius_norm(c); });
}

std::vector<PortraitPoint> scalar_phase_portrait(double a, double q, double r,
                                                 const PortraitGrid& grid) {
  if (!(q > 0.0) || !(r > 0.0)) throw Error(Errc::invalid_argument, "q and r must be positive");
  double tol = grid.tol;
  if (!(tol > 0.0)) {
    tol = 0.5 * std::min(spacing(grid.k1), spacing(grid.k2));
    if (!std::isfinite(tol)) tol = 1e-9;
  }
  std::vector<PortraitPoint> out;
  out.reserve(grid.k1.size() * grid.k2.size());
  for (double k1 : grid.k1) {
    for (double k2 : grid.k2) {
      PortraitPoint p;
      p.k1 = k1;
      p.k2 = k2;
      const double khat = k2 * k1;
      p.boundary = std::fabs(khat - a) <= tol;
      p.manifold = std::fabs(k1 + k2) <= tol;
      p.in_domain = khat > a;
      if (p.in_domain) {
        const double f = scalar_models::lffnn_scalar_f(a, q, r, khat);
        p.v1 = -f * k2;
        p.v2 = -f * k1;
        p.equilibrium = std::fabs(f) <= 1e-9;
      } else {
        p.v1 = p.v2 = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(p);
    }
  }
  return out;
}

FactoredGain scalar_pair(double k1, double khat) {
  if (k1 == 0.0 || !std::isfinite(k1)) throw Error(Errc::invalid_argument, "k1 must be nonzero");
  return FactoredGain({Matrix::scalar(k1), Matrix::scalar(khat / k1)});
}

FactoredGain scalar_pair_with_imbalance(double khat, double c_sqrt) {
  if (!(c_sqrt >= 0.0)) throw Error(Errc::invalid_argument, "c_sqrt must be nonnegative");
  const double s = c_sqrt * c_sqrt;
  const double k1_sq = 0.5 * (s + std::sqrt(s * s + 4.0 * khat * khat));
  if (!(k1_sq > 0.0)) throw Error(Errc::invalid_argument, "zero product with zero imbalance");
  return scalar_pair(std::sqrt(k1_sq), khat);
}

FactoredGain random_factored_gain(const LqrProblem& prob, const std::vector<std::size_t>& kappa,
                                  double scale, std::uint64_t seed, int max_tries) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<std::size_t> dims;
  dims.push_back(prob.n());
  dims.insert(dims.end(), kappa.begin(), kappa.end());
  dims.push_back(prob.m());
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<Matrix> factors;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      Matrix f(dims[i + 1], dims[i]);
      for (double& v : f.data()) v = normal(rng);
      factors.push_back(std::move(f));
    }
    FactoredGain fg(std::move(factors));
    if (is_stabilizing(prob, product(fg))) return fg;
  }
  throw Error(Errc::no_stabilizing_gain, "no stabilizing random factorization found");
}

std::size_t final_product_rank(const Trajectory& traj, double rel_tol) {
  if (traj.states.empty()) throw Error(Errc::empty_sample, "empty trajectory");
  const FlowState& last = traj.states.back();
  if (const auto* fg = std::get_if<FactoredGain>(&last)) return numerical_rank(product(*fg), rel_tol);
  return numerical_rank(std::get<Matrix>(last), rel_tol);
}

}  // namespace pliflows
