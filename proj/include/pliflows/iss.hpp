#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pliflows/disturbance.hpp"
#include "pliflows/flow.hpp"
#include "pliflows/lqr.hpp"

namespace pliflows {

struct SweepRow {
  double delta = 0.0;
  std::size_t init_id = 0;
  std::size_t phase_id = 0;
  double overshoot = 0.0;  // max regret over the run
  double tail = 0.0;       // max regret over the final 10% of the run
  bool left_domain = false;
  std::string diagnostic;  // set when left_domain
};

struct GainSweepReport {
  std::vector<SweepRow> rows;  // ordered by (delta, init, phase)
  std::vector<double> deltas;
  // Max tail over inits and phases at each delta; rows that left the domain
  // are excluded and counted in destabilized.
  std::vector<double> gamma_hat;
  std::vector<std::size_t> destabilized;
};

struct SweepOptions {
  std::size_t phases = 3;
  double tail_fraction = 0.1;
};

// Runs integrate_flow for every (delta, init, phase) with the template's
// disturbance rescaled to delta. Amplitudes must be strictly increasing and
// contain 0. Throws PreconditionViolated for a non-stabilizing init.
GainSweepReport gain_sweep(const LqrProblem& prob, const std::vector<FlowState>& inits,
                           const std::vector<double>& amplitudes, const FlowSpec& spec,
                           const SweepOptions& options = {});

struct AsymptoticGainReport {
  std::vector<double> deltas;
  std::vector<double> epsilon_hat;     // max tail regret at each delta
  std::vector<double> margins;         // ||k1(0) + k2(0)'|| - 2 sqrt(max(a, 0)) per init
  GainSweepReport sweep;
};

// Scalar plant xdot = a x + u behind a two-layer network of hidden width
// kappa1. Throws PreconditionViolated listing inits with a nonpositive margin.
AsymptoticGainReport lffnn_asymptotic_gain(double a, double q, double r, std::size_t kappa1,
                                           const std::vector<FactoredGain>& inits,
                                           const std::vector<double>& amplitudes,
                                           const FlowSpec& spec, const SweepOptions& options = {});

double manifold_margin(double a, const FactoredGain& init);

struct OvershootReport {
  double peak = 0.0;
  // First recorded time with regret <= omega0 / 2; empty if never reached.
  std::optional<double> time_to_half;
  double tail = 0.0;
};

OvershootReport overshoot_report(const Trajectory& traj, double omega0,
                                 double tail_fraction = 0.1);

// Max regret over samples with t >= (1 - fraction) * t_last.
double tail_regret(const Trajectory& traj, double fraction = 0.1);

// -max Re(eig(M)), found by bisection on the Hurwitz test (relative accuracy
// about 1e-5 near defective spectra); 0 if M is not Hurwitz.
double decay_rate(const Matrix& m);

// Slowest rate of the flow linearized at k_opt: the regret of a plain
// gradient flow decays like exp(-2 rate t) there. Gradient flows give
// 2 eta lmin(R) lmin(Y*), natural flows 2 eta lmin(R), Gauss-Newton eta.
// Factored flows use the gradient rate times min(1, 2 ||k_opt||_F), the
// balanced two-layer value.
double flow_local_rate(const LqrProblem& prob, FlowKind kind = FlowKind::gradient, double eta = 1.0);

// 200 / min(decay rate of A - B k_opt, flow_local_rate), capped at 1e4.
double default_horizon(const LqrProblem& prob, FlowKind kind = FlowKind::gradient, double eta = 1.0);

// Worker count: PLIFLOWS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

// Calls fn(i) for i in [0, count) on up to worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace pliflows
