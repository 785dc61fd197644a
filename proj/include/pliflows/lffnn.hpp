#pragma once

#include <cstdint>
#include <vector>

#include "pliflows/factored_gain.hpp"
#include "pliflows/flow.hpp"

namespace pliflows {

// Max over snapshots and i of ||C_i(t) - C_i(0)||_F. Throws NotFactored for
// trajectories of plain gains.
double conservation_deviation(const Trajectory& traj);
// Same, each term divided by 1 + ||C_i(0)||_F.
double conservation_relative_deviation(const Trajectory& traj);

struct PortraitGrid {
  std::vector<double> k1;
  std::vector<double> k2;
  // Half-width of the boundary and manifold bands; 0 picks half the finer grid spacing.
  double tol = 0.0;
};

struct PortraitPoint {
  double k1 = 0.0, k2 = 0.0;
  double v1 = 0.0, v2 = 0.0;  // NaN where k2 k1 <= a
  bool equilibrium = false;   // |f(k2 k1)| <= 1e-9
  bool boundary = false;      // |k2 k1 - a| <= tol
  bool manifold = false;      // |k1 + k2| <= tol
  bool in_domain = false;
};

// Descent field (-f(k2 k1) k2, -f(k2 k1) k1) of the scalar N = 2 network on
// xdot = a x + u. Points are ordered k1-major.
std::vector<PortraitPoint> scalar_phase_portrait(double a, double q, double r,
                                                 const PortraitGrid& grid);

// Scalar N = 2 factorization (k1, khat / k1) with product khat. Every choice of
// k1 != 0 gives the same loss; the imbalance grows with |k1^2 - (khat/k1)^2|.
FactoredGain scalar_pair(double k1, double khat);

// Point on the hyperbola k2 k1 = khat with k1 > 0 and k1^2 - k2^2 = c_sqrt^2.
FactoredGain scalar_pair_with_imbalance(double khat, double c_sqrt);

// Random N-layer factorization with hidden widths kappa (entries N(0, scale^2)),
// rejected until the product stabilizes prob. Throws NoStabilizingGain after
// max_tries.
FactoredGain random_factored_gain(const LqrProblem& prob, const std::vector<std::size_t>& kappa,
                                  double scale, std::uint64_t seed, int max_tries = 10000);

// Numerical rank of the product at the last snapshot.
std::size_t final_product_rank(const Trajectory& traj, double rel_tol = 1e-8);

}  // namespace pliflows
