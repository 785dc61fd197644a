#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pliflows/comparison.hpp"
#include "pliflows/disturbance.hpp"
#include "pliflows/factored_gain.hpp"
#include "pliflows/lqr.hpp"
#include "pliflows/ode.hpp"

namespace pliflows {

enum class FlowKind {
  gradient,      // kdot = -eta grad L(k)
  natural,       // kdot = -eta 2 (Rk - B'P)
  gauss_newton,  // kdot = -eta (k - R^-1 B'P)
  factored,      // k_i dot = -eta grad_{k_i} L(k_N ... k_1)
};

const char* to_string(FlowKind kind) noexcept;
FlowKind flow_kind_from_string(const std::string& name);

struct FlowSpec {
  FlowKind kind = FlowKind::gradient;
  double eta = 1.0;
  // Added to the vector field with B(k) = identity. Its shape is overwritten
  // to match the flow state.
  std::optional<DisturbanceSpec> disturbance;
  // Early stop once ||grad L||_F <= stop_grad_tol (ignored with a disturbance).
  double stop_grad_tol = 1e-9;
  double t_max = 100.0;
  std::size_t samples = 400;
  ode::Options ode;

  void validate() const;
};

using FlowState = std::variant<Matrix, FactoredGain>;

struct Trajectory {
  FlowKind kind = FlowKind::gradient;
  std::vector<double> times;
  std::vector<FlowState> states;
  std::vector<double> losses;
  // Empty when the problem has no Riccati optimum.
  std::vector<double> regrets;
  // ||grad L||_F of the flow's own parameters (all factors for factored runs).
  std::vector<double> grad_norms;
  // Per snapshot imbalance measures c_1..c_{N-1}; empty for plain gains.
  std::vector<std::vector<double>> imbalances;
  // Running sup of ||u|| up to each snapshot; empty without disturbance.
  std::vector<double> u_sup;
  double disturbance_sup = 0.0;
  bool stopped_early = false;
  ode::Stats stats;

  std::size_t size() const noexcept { return times.size(); }
  bool factored() const noexcept { return kind == FlowKind::factored; }
  bool has_regret() const noexcept { return !regrets.empty(); }
};

// Accepts iff A - B k is Hurwitz (k the product for factored states).
bool domain_guard(const LqrProblem& prob, const FlowState& candidate);

// Integrates the selected flow, recording samples on a uniform grid of
// spec.samples points over [0, t_max] plus the final state on early stop.
// Throws NotStabilizing for a bad initial state, LeftDomain when the guard
// cannot keep iterates stabilizing.
Trajectory integrate_flow(const LqrProblem& prob, const FlowState& init, const FlowSpec& spec);

// Solves rdot = -alpha(r)^2, r(t0) = ell0 on t_grid (closed form for gl-PLI).
std::vector<double> comparison_bound(const ComparisonFn& alpha, double ell0,
                                     std::span<const double> t_grid);

}  // namespace pliflows
