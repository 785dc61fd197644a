#include "pliflows/flow.hpp"

#include <algorithm>
#include <cmath>

#include "pliflows/error.hpp"
#include "pliflows/kernels.hpp"

namespace pliflows {

const char* to_string(FlowKind kind) noexcept {
  switch (kind) {
    case FlowKind::gradient: return "gradient";
    case FlowKind::natural: return "natural";
    case FlowKind::gauss_newton: return "gauss_newton";
    case FlowKind::factored: return "factored";
  }
  return "gradient";
}

FlowKind flow_kind_from_string(const std::string& name) {
  for (auto kind : {FlowKind::gradient, FlowKind::natural, FlowKind::gauss_newton,
                    FlowKind::factored}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(Errc::invalid_argument, "unknown flow kind '" + name + "'");
}

void FlowSpec::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(Errc::invalid_argument, "eta must be > 0");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw Error(Errc::invalid_argument, "t_max must be > 0");
  }
  if (!(stop_grad_tol >= 0.0)) throw Error(Errc::invalid_argument, "stop_grad_tol must be >= 0");
  if (samples < 2) throw Error(Errc::invalid_argument, "need at least 2 output samples");
  if (!(ode.rtol > 0.0) || !(ode.atol > 0.0)) {
    throw Error(Errc::invalid_argument, "integration tolerances must be positive");
  }
  if (disturbance) disturbance->validate();
}

namespace {

// What the flow records at one state.
struct Snapshot {
  double loss = 0.0;
  double grad_norm = 0.0;
};

class FlowSystem final : public ode::System {
 public:
  FlowSystem(const LqrProblem& prob, const FlowState& init, const FlowSpec& spec)
      : prob_(prob), spec_(spec) {
    if (const auto* fg = std::get_if<FactoredGain>(&init)) {
      layout_ = *fg;
      dim_ = fg->parameter_count();
    } else {
      const auto& k = std::get<Matrix>(init);
      gain_rows_ = k.rows();
      gain_cols_ = k.cols();
      dim_ = k.size();
    }
    if (spec_.disturbance && spec_.disturbance->active()) {
      disturbance_ = *spec_.disturbance;
      disturbance_->rows = dim_;
      disturbance_->cols = 1;
      u_.assign(dim_, 0.0);
    }
  }

  std::size_t dim() const override { return dim_; }
  bool disturbed() const noexcept { return disturbance_.has_value(); }

  FlowState state(std::span<const double> y) const {
    if (layout_) return layout_->with_parameters(y);
    return Matrix(gain_rows_, gain_cols_, std::vector<double>(y.begin(), y.end()));
  }

  void derivative(double t, std::span<const double> y, std::span<double> dy) const override {
    const double eta = spec_.eta;
    if (layout_) {
      const FactoredEvaluation ev = evaluate_factored(prob_, layout_->with_parameters(y));
      std::size_t offset = 0;
      for (const Matrix& g : ev.gradients) {
        for (double v : g.data()) dy[offset++] = -eta * v;
      }
      remember(y, {ev.at_product.loss, ev.gradient_norm});
    } else {
      const Matrix k(gain_rows_, gain_cols_, std::vector<double>(y.begin(), y.end()));
      const GainEvaluation ev = evaluate(prob_, k);
      Matrix direction;
      switch (spec_.kind) {
        case FlowKind::gradient: direction = ev.gradient; break;
        case FlowKind::natural:
          direction = 2.0 * (prob_.R() * k - prob_.B().transpose() * ev.p);
          break;
        case FlowKind::gauss_newton:
          direction = k - solve_spd(prob_.R(), prob_.B().transpose() * ev.p);
          break;
        case FlowKind::factored:
          throw Error(Errc::invalid_argument, "factored flow needs a factored state");
      }
      for (std::size_t i = 0; i < dim_; ++i) dy[i] = -eta * direction.data()[i];
      remember(y, {ev.loss, frobenius_norm(ev.gradient)});
    }
    if (disturbance_) {
      disturbance_value_into(*disturbance_, t, u_);
      kernels::axpy(1.0, u_, dy);
    }
  }

  // Loss and gradient norm at y, reusing the last derivative evaluation when
  // it was taken at exactly this state (the FSAL stage of an accepted step).
  Snapshot snapshot(std::span<const double> y) const {
    if (std::equal(y.begin(), y.end(), last_y_.begin(), last_y_.end())) return last_;
    if (layout_) {
      const FactoredEvaluation ev = evaluate_factored(prob_, layout_->with_parameters(y));
      return {ev.at_product.loss, ev.gradient_norm};
    }
    const GainEvaluation ev =
        evaluate(prob_, Matrix(gain_rows_, gain_cols_, std::vector<double>(y.begin(), y.end())));
    return {ev.loss, frobenius_norm(ev.gradient)};
  }

  double disturbance_norm(double t) const {
    if (!disturbance_) return 0.0;
    disturbance_value_into(*disturbance_, t, u_);
    return std::sqrt(kernels::dot(u_, u_));
  }

 private:
  void remember(std::span<const double> y, Snapshot s) const {
    last_y_.assign(y.begin(), y.end());
    last_ = s;
  }

  const LqrProblem& prob_;
  const FlowSpec& spec_;
  std::optional<FactoredGain> layout_;
  std::size_t gain_rows_ = 0, gain_cols_ = 0, dim_ = 0;
  std::optional<DisturbanceSpec> disturbance_;
  mutable std::vector<double> u_;
  mutable std::vector<double> last_y_;
  mutable Snapshot last_;
};

std::vector<double> initial_vector(const FlowState& init) {
  if (const auto* fg = std::get_if<FactoredGain>(&init)) return fg->flatten();
  const auto& k = std::get<Matrix>(init);
  return {k.data().begin(), k.data().end()};
}

}  // namespace

bool domain_guard(const LqrProblem& prob, const FlowState& candidate) {
  const Matrix k = std::holds_alternative<FactoredGain>(candidate)
                       ? product(std::get<FactoredGain>(candidate))
                       : std::get<Matrix>(candidate);
  if (k.rows() != prob.m() || k.cols() != prob.n()) return false;
  return is_stabilizing(prob, k);
}

Trajectory integrate_flow(const LqrProblem& prob, const FlowState& init, const FlowSpec& spec) {
  spec.validate();
  const bool factored_init = std::holds_alternative<FactoredGain>(init);
  if (factored_init != (spec.kind == FlowKind::factored)) {
    throw Error(Errc::invalid_argument,
                "flow kind " + std::string(to_string(spec.kind)) + " does not match the state");
  }
  if (!domain_guard(prob, init)) {
    throw Error(Errc::not_stabilizing, "initial gain does not stabilize (A, B)");
  }

  const FlowSystem system(prob, init, spec);
  const bool early_stop = !system.disturbed() && spec.stop_grad_tol > 0.0;

  Trajectory traj;
  traj.kind = spec.kind;
  const bool with_regret = prob.has_optimum();
  double running_sup = 0.0;

  auto record = [&](double t, std::span<const double> y) {
    const Snapshot s = system.snapshot(y);
    FlowState state = system.state(y);
    if (const auto* fg = std::get_if<FactoredGain>(&state)) {
      traj.imbalances.push_back(imbalance(*fg).measures);
    }
    traj.times.push_back(t);
    traj.states.push_back(std::move(state));
    traj.losses.push_back(s.loss);
    traj.grad_norms.push_back(s.grad_norm);
    if (with_regret) traj.regrets.push_back(regret_from_loss(prob, s.loss));
    if (system.disturbed()) {
      running_sup = std::max(running_sup, system.disturbance_norm(t));
      traj.u_sup.push_back(running_sup);
    }
  };

  auto stop = [&](double t, std::span<const double> y) {
    if (system.disturbed()) running_sup = std::max(running_sup, system.disturbance_norm(t));
    return early_stop && system.snapshot(y).grad_norm <= spec.stop_grad_tol;
  };

  const std::vector<double> grid = ode::uniform_grid(spec.t_max, spec.samples);
  ode::Result result = ode::integrate(system, initial_vector(init), grid, record, stop, spec.ode);
  if (result.t > traj.times.back()) record(result.t, result.y);
  traj.stopped_early = result.stopped_early;
  traj.stats = result.stats;
  traj.disturbance_sup = running_sup;
  return traj;
}

namespace {

class ComparisonSystem final : public ode::System {
 public:
  explicit ComparisonSystem(const ComparisonFn& alpha) : alpha_(alpha) {}
  std::size_t dim() const override { return 1; }
  void derivative(double, std::span<const double> y, std::span<double> dy) const override {
    dy[0] = -alpha_.squared(y[0]);
  }

 private:
  const ComparisonFn& alpha_;
};

}  // namespace

std::vector<double> comparison_bound(const ComparisonFn& alpha, double ell0,
                                     std::span<const double> t_grid) {
  if (!(ell0 >= 0.0)) throw Error(Errc::invalid_argument, "ell0 must be nonnegative");
  std::vector<double> out;
  out.reserve(t_grid.size());
  if (t_grid.empty()) return out;
  if (ell0 == 0.0) return std::vector<double>(t_grid.size(), 0.0);
  if (alpha.variant() == ComparisonFn::Variant::gl_pli) {
    for (double t : t_grid) out.push_back(ell0 * std::exp(-alpha.lambda() * (t - t_grid.front())));
    return out;
  }
  const ComparisonSystem system(alpha);
  ode::Options opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-14 * ell0;
  ode::integrate(system, {ell0}, t_grid,
                 [&](double, std::span<const double> y) { out.push_back(std::max(y[0], 0.0)); },
                 {}, opt);
  return out;
}

}  // namespace pliflows
