#include "pliflows/iss.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include "pliflows/error.hpp"

namespace pliflows {

std::size_t worker_count() {
  if (const char* env = std::getenv("PLIFLOWS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  // Lowest index first, so the reported failure does not depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double tail_regret(const Trajectory& traj, double fraction) {
  if (!traj.has_regret()) throw Error(Errc::invalid_argument, "trajectory has no regret record");
  const double start = (1.0 - fraction) * traj.times.back();
  double tail = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] >= start) tail = std::max(tail, traj.regrets[i]);
  }
  return tail;
}

OvershootReport overshoot_report(const Trajectory& traj, double omega0, double tail_fraction) {
  OvershootReport rep;
  if (traj.size() == 0 || !traj.has_regret()) return rep;
  rep.peak = omega0;
  for (double r : traj.regrets) rep.peak = std::max(rep.peak, r);
  if (omega0 <= 0.0) {
    rep.time_to_half = 0.0;
  } else {
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (traj.regrets[i] <= 0.5 * omega0) {
        rep.time_to_half = traj.times[i];
        break;
      }
    }
  }
  rep.tail = tail_regret(traj, tail_fraction);
  return rep;
}

GainSweepReport gain_sweep(const LqrProblem& prob, const std::vector<FlowState>& inits,
                           const std::vector<double>& amplitudes, const FlowSpec& spec,
                           const SweepOptions& options) {
  if (amplitudes.empty() || std::find(amplitudes.begin(), amplitudes.end(), 0.0) == amplitudes.end()) {
    throw Error(Errc::invalid_argument, "amplitudes must include 0");
  }
  for (std::size_t i = 1; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] > amplitudes[i - 1])) {
      throw Error(Errc::invalid_argument, "amplitudes must be strictly increasing");
    }
  }
  if (options.phases == 0 || !(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0)) {
    throw Error(Errc::invalid_argument, "bad sweep options");
  }
  if (!prob.has_optimum()) prob.optimum();  // rethrows the Riccati failure
  for (std::size_t i = 0; i < inits.size(); ++i) {
    if (!domain_guard(prob, inits[i])) {
      throw Error(Errc::precondition_violated, "init " + std::to_string(i) + " is not stabilizing");
    }
  }
  const DisturbanceSpec base = spec.disturbance.value_or(DisturbanceSpec{});

  GainSweepReport rep;
  rep.deltas = amplitudes;
  const std::size_t per_delta = inits.size() * options.phases;
  rep.rows.resize(amplitudes.size() * per_delta);
  parallel_for(rep.rows.size(), [&](std::size_t idx) {
    SweepRow& row = rep.rows[idx];
    row.delta = amplitudes[idx / per_delta];
    row.init_id = (idx % per_delta) / options.phases;
    row.phase_id = idx % options.phases;
    FlowSpec run = spec;
    run.disturbance = base.with_amplitude(row.delta).with_phase(row.phase_id, options.phases);
    try {
      const Trajectory traj = integrate_flow(prob, inits[row.init_id], run);
      row.overshoot = *std::max_element(traj.regrets.begin(), traj.regrets.end());
      row.tail = tail_regret(traj, options.tail_fraction);
    } catch (const Error& e) {
      if (e.code() != Errc::left_domain) throw;
      row.left_domain = true;
      row.diagnostic = e.what();
    }
  });

  for (std::size_t d = 0; d < amplitudes.size(); ++d) {
    double gamma = 0.0;
    std::size_t bad = 0;
    for (std::size_t j = 0; j < per_delta; ++j) {
      const SweepRow& row = rep.rows[d * per_delta + j];
      if (row.left_domain) {
        ++bad;
      } else {
        gamma = std::max(gamma, row.tail);
      }
    }
    rep.gamma_hat.push_back(gamma);
    rep.destabilized.push_back(bad);
  }
  return rep;
}

double manifold_margin(double a, const FactoredGain& init) {
  if (init.depth() != 2) throw Error(Errc::invalid_argument, "margin needs a two-layer network");
  return frobenius_norm(init[0] + init[1].transpose()) - 2.0 * std::sqrt(std::max(a, 0.0));
}

AsymptoticGainReport lffnn_asymptotic_gain(double a, double q, double r, std::size_t kappa1,
                                           const std::vector<FactoredGain>& inits,
                                           const std::vector<double>& amplitudes,
                                           const FlowSpec& spec, const SweepOptions& options) {
  AsymptoticGainReport rep;
  std::string offending;
  std::vector<FlowState> states;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    const FactoredGain& fg = inits[i];
    if (fg.depth() != 2 || fg.input_dim() != 1 || fg.output_dim() != 1 || fg[0].rows() != kappa1) {
      throw Error(Errc::dimension_mismatch,
                  "init " + std::to_string(i) + " is not a scalar two-layer network of width " +
                      std::to_string(kappa1));
    }
    const double margin = manifold_margin(a, fg);
    rep.margins.push_back(margin);
    if (!(margin > 0.0)) offending += (offending.empty() ? "" : ", ") + std::to_string(i);
    states.emplace_back(fg);
  }
  if (!offending.empty()) {
    throw Error(Errc::precondition_violated, "inits without manifold margin: " + offending);
  }
  FlowSpec run = spec;
  run.kind = FlowKind::factored;
  rep.sweep = gain_sweep(LqrProblem::scalar(a, 1.0, q, r), states, amplitudes, run, options);
  rep.deltas = rep.sweep.deltas;
  rep.epsilon_hat = rep.sweep.gamma_hat;
  return rep;
}

double decay_rate(const Matrix& m) {
  require_square(m, "decay_rate");
  if (!is_hurwitz(m)) return 0.0;
  const Matrix eye = Matrix::identity(m.rows());
  double lo = 0.0;
  double hi = std::max(1.0, frobenius_norm(m));
  while (is_hurwitz(m + hi * eye)) hi *= 2.0;
  for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (is_hurwitz(m + mid * eye)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

namespace {

// Smallest eigenvalue of a symmetric positive definite matrix by bisection.
double min_eigenvalue(const Matrix& s) {
  const Matrix eye = Matrix::identity(s.rows());
  double lo = 0.0, hi = s.trace();
  for (int it = 0; it < 100 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (is_positive_definite(s - mid * eye)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

double flow_local_rate(const LqrProblem& prob, FlowKind kind, double eta) {
  const Matrix& k_opt = prob.optimum().k_opt;
  const double r_min = min_eigenvalue(prob.R());
  switch (kind) {
    case FlowKind::gauss_newton: return eta;
    case FlowKind::natural: return 2.0 * eta * r_min;
    case FlowKind::gradient:
    case FlowKind::factored: break;
  }
  const double rate = 2.0 * eta * r_min * min_eigenvalue(evaluate(prob, k_opt).y);
  if (kind == FlowKind::factored) return rate * std::min(1.0, 2.0 * frobenius_norm(k_opt));
  return rate;
}

double default_horizon(const LqrProblem& prob, FlowKind kind, double eta) {
  const double rate = std::min(decay_rate(prob.closed_loop(prob.optimum().k_opt)),
                               flow_local_rate(prob, kind, eta));
  if (!(rate > 0.0)) return 1e4;
  return std::min(200.0 / rate, 1e4);
}

}  // namespace pliflows
