#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pliflows/error.hpp"
#include "pliflows/kernels.hpp"
#include "pliflows/ode.hpp"

namespace pliflows::ode {
namespace {

// Dormand & Prince (1980) 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Step-size controller constants (Hairer, Norsett & Wanner, DOPRI5).
constexpr double kSafe = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kMaxShrink = 1.0 / 0.2;  // fac1
constexpr double kMaxGrow = 1.0 / 10.0;   // 1 / fac2

class Stepper {
 public:
  Stepper(const System& system, std::size_t n, const Options& options, Stats& stats)
      : sys_(system), opt_(options), stats_(stats) {
    for (auto& k : k_) k.assign(n, 0.0);
    tmp_.assign(n, 0.0);
    ynew_.assign(n, 0.0);
    err_.assign(n, 0.0);
  }

  // Derivative at (t, y) into out; false when y is outside the domain.
  bool eval(double t, std::span<const double> y, std::span<double> out) {
    ++stats_.evaluations;
    try {
      sys_.derivative(t, y, out);
    } catch (const Error& e) {
      if (e.code() == Errc::not_stabilizing) return false;
      throw;
    }
    return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
  }

  bool start(double t, std::span<const double> y) { return eval(t, y, k_[0]); }

  // Attempts one step of size h from (t, y). On success fills ynew_, k_[6]
  // and returns the scaled error norm; returns NaN for a domain rejection.
  double attempt(double t, std::span<const double> y, double h) {
    auto stage = [&](std::initializer_list<std::pair<double, int>> terms) {
      std::copy(y.begin(), y.end(), tmp_.begin());
      for (const auto& [coef, idx] : terms) kernels::axpy(h * coef, k_[idx], tmp_);
    };
    stage({{a21, 0}});
    if (!eval(t + c2 * h, tmp_, k_[1])) return std::nan("");
    stage({{a31, 0}, {a32, 1}});
    if (!eval(t + c3 * h, tmp_, k_[2])) return std::nan("");
    stage({{a41, 0}, {a42, 1}, {a43, 2}});
    if (!eval(t + c4 * h, tmp_, k_[3])) return std::nan("");
    stage({{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}});
    if (!eval(t + c5 * h, tmp_, k_[4])) return std::nan("");
    stage({{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}});
    if (!eval(t + h, tmp_, k_[5])) return std::nan("");
    stage({{a71, 0}, {a73, 2}, {a74, 3}, {a75, 4}, {a76, 5}});
    std::copy(tmp_.begin(), tmp_.end(), ynew_.begin());
    if (!eval(t + h, ynew_, k_[6])) return std::nan("");

    std::fill(err_.begin(), err_.end(), 0.0);
    for (const auto& [coef, idx] : {std::pair{e1, 0}, std::pair{e3, 2}, std::pair{e4, 3},
                                    std::pair{e5, 4}, std::pair{e6, 5}, std::pair{e7, 6}}) {
      kernels::axpy(h * coef, k_[idx], err_);
    }
    const double sq = kernels::scaled_error_sq(err_, y, ynew_, opt_.atol, opt_.rtol);
    const double norm = std::sqrt(sq / static_cast<double>(y.size()));
    return std::isfinite(norm) ? norm : std::nan("");
  }

  void accept() { std::swap(k_[0], k_[6]); }

  const std::vector<double>& ynew() const { return ynew_; }
  const std::vector<double>& f0() const { return k_[0]; }
  std::vector<double>& scratch() { return tmp_; }
  std::vector<double>& scratch_derivative() { return k_[1]; }

 private:
  const System& sys_;
  const Options& opt_;
  Stats& stats_;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> tmp_, ynew_, err_;
};

double scaled_norm(std::span<const double> v, std::span<const double> y, const Options& opt) {
  return std::sqrt(kernels::scaled_error_sq(v, y, y, opt.atol, opt.rtol) /
                   static_cast<double>(v.size()));
}

// Initial step guess (Hairer, Norsett & Wanner, II.4), halved while the
// probe state leaves the domain.
double initial_step(Stepper& st, double t, std::span<const double> y, double hmax,
                    const Options& opt) {
  const auto& f0 = st.f0();
  const double d0 = scaled_norm(y, y, opt);
  const double d1 = scaled_norm(f0, y, opt);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, hmax);
  auto& probe = st.scratch();
  auto& f1 = st.scratch_derivative();
  for (int tries = 0;; ++tries) {
    std::copy(y.begin(), y.end(), probe.begin());
    kernels::axpy(h0, f0, probe);
    if (st.eval(t + h0, probe, f1)) break;
    if (tries >= opt.max_domain_halvings) {
      throw Error(Errc::left_domain, "no admissible initial step");
    }
    h0 *= 0.5;
  }
  std::vector<double> diff(f1.begin(), f1.end());
  kernels::axpy(-1.0, f0, diff);
  const double d2 = scaled_norm(diff, y, opt) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, hmax});
}

}  // namespace

std::vector<double> uniform_grid(double t_max, std::size_t count) {
  if (!(t_max > 0.0) || count < 2) {
    throw Error(Errc::invalid_argument, "uniform_grid needs t_max > 0 and at least 2 points");
  }
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = t_max * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  grid.back() = t_max;
  return grid;
}

Result integrate(const System& system, std::vector<double> y0, std::span<const double> output_times,
                 const OutputFn& on_output, const StopFn& should_stop, const Options& options) {
  if (output_times.empty()) throw Error(Errc::invalid_argument, "no output times");
  if (y0.size() != system.dim()) throw Error(Errc::dimension_mismatch, "initial state size");
  for (std::size_t i = 1; i < output_times.size(); ++i) {
    if (!(output_times[i] > output_times[i - 1])) {
      throw Error(Errc::invalid_argument, "output times must be strictly increasing");
    }
  }

  Result result;
  result.t = output_times.front();
  result.y = std::move(y0);
  Stepper st(system, result.y.size(), options, result.stats);
  if (!st.start(result.t, result.y)) {
    throw Error(Errc::not_stabilizing, "initial state is outside the domain");
  }
  if (on_output) on_output(result.t, result.y);
  if (output_times.size() == 1) return result;

  double& t = result.t;
  std::vector<double>& y = result.y;
  double h = initial_step(st, t, y, output_times.back() - t, options);
  double facold = 1e-4;
  bool last_rejected = false;
  int domain_halvings = 0;
  std::size_t next_out = 1;

  while (next_out < output_times.size()) {
    if (result.stats.accepted + result.stats.rejected_error >= options.max_steps) {
      throw Error(Errc::not_converged, "step budget exhausted at t=" + std::to_string(t));
    }
    const double target = output_times[next_out];
    const bool lands = t + 1.01 * h >= target;
    const double h_try = lands ? target - t : h;
    if (!(h_try > 1e-14 * std::max(1.0, std::fabs(t)))) {
      throw Error(Errc::not_converged, "step size underflow at t=" + std::to_string(t));
    }

    const double err = st.attempt(t, y, h_try);
    if (std::isnan(err)) {
      ++result.stats.rejected_domain;
      if (++domain_halvings > options.max_domain_halvings) {
        throw Error(Errc::left_domain, "iterates left the stabilizing set near t=" +
                                           std::to_string(t));
      }
      h = 0.5 * h_try;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(std::max(err, 1e-300), kExpo);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafe, kMaxGrow, kMaxShrink);
      double h_next = h_try / fac;
      if (last_rejected) h_next = std::min(h_next, h_try);
      facold = std::max(err, 1e-4);

      t = lands ? target : t + h_try;
      std::copy(st.ynew().begin(), st.ynew().end(), y.begin());
      st.accept();
      ++result.stats.accepted;
      domain_halvings = 0;
      last_rejected = false;
      // A clipped step says nothing against the previous proposal.
      h = lands ? std::max(h_next, h) : h_next;

      if (lands) {
        if (on_output) on_output(t, y);
        ++next_out;
      }
      if (should_stop && should_stop(t, y)) {
        result.stopped_early = next_out < output_times.size();
        return result;
      }
    } else {
      ++result.stats.rejected_error;
      h = h_try / std::min(kMaxShrink, fac11 / kSafe);
      last_rejected = true;
    }
  }
  return result;
}

}  // namespace pliflows::ode
