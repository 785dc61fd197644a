#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pliflows/comparison.hpp"
#include "pliflows/flow.hpp"
#include "pliflows/lqr.hpp"

namespace pliflows {

// One point of the (regret, gradient norm) landscape.
struct Sample {
  double r = 0.0;
  double g = 0.0;
  std::vector<double> point;  // gain entries (or the scalar coordinate) it came from
};

struct SampleSet {
  std::vector<Sample> samples;
  std::size_t skipped = 0;  // non-stabilizing or out-of-domain points
};

// Scalar model given as k -> (loss, dL/dk), or nullopt outside its domain.
using ScalarLandscape = std::function<std::optional<std::pair<double, double>>(double)>;

// Each sampler throws EmptySample if no admissible point remains.
SampleSet sample_scalar(const ScalarLandscape& model, double min_loss,
                        const std::vector<double>& grid);
SampleSet sample_gains(const LqrProblem& prob, const std::vector<Matrix>& gains);
// Gains base + s * d1 + t * d2 over the grid s x t.
SampleSet sample_affine_slice(const LqrProblem& prob, const Matrix& base, const Matrix& d1,
                              const Matrix& d2, const std::vector<double>& s_values,
                              const std::vector<double>& t_values);
// Recorded snapshots; g is the LQR gradient norm at the (product) gain.
SampleSet sample_trajectory(const LqrProblem& prob, const Trajectory& traj);

// Samples with r below this are treated as the minimum itself.
inline constexpr double kRegretFloor = 1e-12;

// min g^2 / r over samples with kRegretFloor < r <= rho. Throws EmptySample.
double estimate_sgl_constant(const std::vector<Sample>& samples, double rho);

struct SatFitOptions {
  std::size_t grid_points = 64;
  double span_lo = 1e-3;  // b-grid spans [span_lo, span_hi] * median r
  double span_hi = 1e3;
  // Largest b whose local rate a(b)/b keeps this fraction of the best one.
  double rate_retention = 0.9;
};

struct PliFit {
  std::vector<Sample> samples;
  ComparisonFn fitted = ComparisonFn::gl_pli(1.0);
  bool feasible = false;
  double slack = 0.0;  // min over samples of g^2 - alpha(r)^2
  double best_rate = 0.0;  // max over the b-grid of a(b)/b
};

// For each b on the grid, a(b) = min g^2 (b + r) / r is the largest admissible
// a. Throws EmptySample, or Degenerate when some sample has r > 0 and g = 0.
PliFit fit_sat_pli(const std::vector<Sample>& samples, const SatFitOptions& options = {});

struct Witness {
  std::string comparison_class;  // "gl", "sat", "kinf" or "pd"
  Sample sample;
};

struct ClassifyOptions {
  double gl_threshold = 1e-8;
  double pd_tol = 1e-12;
  SatFitOptions sat;
};

struct ClassifyReport {
  bool gl_feasible = false;
  bool sat_feasible = false;
  bool kinf_feasible = false;  // advisory envelope-growth heuristic
  bool pd_feasible = false;
  double gl_min_ratio = 0.0;
  std::optional<PliFit> sat_fit;
  std::vector<Witness> witnesses;  // one per failed class
};

ClassifyReport classify(const std::vector<Sample>& samples, const ClassifyOptions& options = {});

}  // namespace pliflows
