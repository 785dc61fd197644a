// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "pliflows/experiment.hpp"
#include "pliflows/flow.hpp"
#include "pliflows/iss.hpp"
#include "pliflows/lffnn.hpp"
#include "pliflows/pli.hpp"
#include "pliflows/scalar_models.hpp"
#include "support/instances.hpp"

using namespace pliflows;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  auto e = linspace(std::log10(lo), std::log10(hi), n);
  for (double& v : e) v = std::pow(10.0, v);
  return e;
}

const Matrix& final_gain(const Trajectory& t) { return std::get<Matrix>(t.states.back()); }

FlowSpec factored_spec(double t_max, std::size_t samples) {
  FlowSpec spec;
  spec.kind = FlowKind::factored;
  spec.t_max = t_max;
  spec.samples = samples;
  return spec;
}

std::vector<Sample> integrator_grid(double k_max, std::size_t n) {
  std::vector<Sample> out;
  for (double k : logspace(0.1, k_max, n)) {
    const auto lg = scalar_models::ct_integrator_loss(k);
    out.push_back({std::max(0.0, lg.loss - 1.0), std::fabs(lg.grad), {k}});
  }
  return out;
}

// 1. closed forms on the scalar integrator
Outcome closed_form_anchor() {
  const LqrProblem p = LqrProblem::integrator();
  double worst = 0.0;
  for (double k : linspace(0.1, 10.0, 100)) {
    const double l = (1.0 + k * k) / (2.0 * k);
    const double g = (1.0 - 1.0 / (k * k)) / 2.0;
    // absolute floor at roundoff for the gradient's zero at k = 1
    worst = std::max(worst, std::fabs(loss(p, Matrix::scalar(k)) - l) / l);
    worst = std::max(worst, std::fabs(gradient(p, Matrix::scalar(k))(0, 0) - g) / std::max(std::fabs(g), 1e-6));
  }
  const double kopt = p.optimum().k_opt(0, 0);
  const bool opt = std::fabs(kopt - 1.0) <= 1e-10 && std::fabs(p.optimal_loss() - 1.0) <= 1e-10;
  return {worst <= 1e-10 && opt, "max rel err " + fmt("%.2e", worst) + ", optimum (" + fmt("%.12g", kopt) + ", " +
                                     fmt("%.12g", p.optimal_loss()) + ")"};
}

// 2. Riccati anchors
Outcome riccati_anchors() {
  const double e1 = std::fabs(LqrProblem::scalar(0.0).optimum().k_opt(0, 0) - 1.0);
  const double e2 = frobenius_norm(LqrProblem::planar_zero().optimum().k_opt - Matrix::identity(2));
  const double e3 = std::fabs(LqrProblem::scalar(-1.0).optimum().k_opt(0, 0) - (std::sqrt(2.0) - 1.0));
  const double worst = std::max({e1, e2, e3});
  return {worst <= 1e-10, "errors " + fmt("%.1e", e1) + ", " + fmt("%.1e", e2) + ", " + fmt("%.1e", e3)};
}

Matrix fd_gradient(const LqrProblem& p, const Matrix& k) {
  Matrix g(k.rows(), k.cols());
  for (std::size_t i = 0; i < k.data().size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::fabs(k.data()[i]));
    Matrix plus = k, minus = k;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    g.data()[i] = (loss(p, plus) - loss(p, minus)) / (2.0 * h);
  }
  return g;
}

// 3. gradient oracle
Outcome gradient_oracle() {
  double worst = 0.0;
  int count = 0;
  for (std::uint64_t seed = 1000; seed < 1050; ++seed) {
    const auto inst = testsupport::random_instance(seed, 5);
    std::mt19937_64 rng(seed);
    for (int j = 0; j < 3; ++j) {
      const Matrix k = j == 0 ? inst.seed : testsupport::random_stabilizing_gain(inst.prob, inst.seed, rng);
      const Matrix fd = fd_gradient(inst.prob, k);
      worst = std::max(worst, frobenius_norm(gradient(inst.prob, k) - fd) / frobenius_norm(fd));
      ++count;
    }
  }
  return {worst <= 1e-6, std::to_string(count) + " gains, max rel err " + fmt("%.2e", worst)};
}

// 4. convergence of the three plain flows
Outcome flow_convergence() {
  double worst = 0.0;
  for (std::uint64_t seed = 2000; seed < 2020; ++seed) {
    const auto inst = testsupport::random_instance(seed, 4);
    const Matrix& kopt = inst.prob.optimum().k_opt;
    std::mt19937_64 rng(seed);
    const Matrix init = testsupport::random_stabilizing_gain(inst.prob, kopt, rng, 1.0);
    for (FlowKind kind : {FlowKind::gradient, FlowKind::natural, FlowKind::gauss_newton}) {
      FlowSpec spec;
      spec.kind = kind;
      spec.t_max = default_horizon(inst.prob, kind);
      spec.stop_grad_tol = 1e-11;
      const Trajectory t = integrate_flow(inst.prob, init, spec);
      worst = std::max(worst, frobenius_norm(final_gain(t) - kopt));
    }
  }
  return {worst <= 1e-6, "20 instances x 3 flows, max ||k(T) - k_opt|| " + fmt("%.2e", worst)};
}

// 5. linear then exponential regime from k0 = 100
Outcome linear_exponential() {
  const LqrProblem p = LqrProblem::integrator();
  FlowSpec spec;
  spec.t_max = 400.0;
  spec.samples = 4001;
  const Trajectory t = integrate_flow(p, Matrix::scalar(100.0), spec);
  double slope_err = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.times[i] < 1.0 || t.times[i] > 50.0) continue;
    const double slope = (t.regrets[0] - t.regrets[i]) / t.times[i];
    slope_err = std::max(slope_err, std::fabs(slope - 0.25) / 0.25);
  }
  // least-squares slope of log regret over the tail
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = t.regrets[i];
    if (r < 1e-10 || r > 1e-3) continue;
    const double y = std::log(r);
    n += 1;
    sx += t.times[i];
    sy += y;
    sxx += t.times[i] * t.times[i];
    sxy += t.times[i] * y;
  }
  if (n < 10) return {false, "too few tail samples"};
  const double tail_rate = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  const PliFit fit = fit_sat_pli(sample_trajectory(p, t).samples);
  const double lambda_loc = fit.fitted.local_rate();
  const double rate_err = std::fabs(tail_rate - lambda_loc) / lambda_loc;
  return {slope_err <= 0.05 && rate_err <= 0.2,
          "slope err " + fmt("%.2f%%", 100 * slope_err) + ", tail rate " + fmt("%.4f", tail_rate) + " vs a/b " +
              fmt("%.4f", lambda_loc) + " (" + fmt("%.1f%%", 100 * rate_err) + ")"};
}

// 6. sgl constants shrink with the sublevel set and vanish on wide grids
Outcome sgl_monotone() {
  const auto samples = integrator_grid(1e4, 2000);
  bool antitone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double rho : logspace(1e-3, 1e4, 30)) {
    const double lambda = estimate_sgl_constant(samples, rho);
    antitone = antitone && lambda <= prev;
    prev = lambda;
  }
  bool euler = true;
  double prev_h = std::numeric_limits<double>::infinity();
  std::string hs;
  for (double h : {1.0, 0.1, 0.01}) {
    const double k_star = scalar_models::dt_euler_minimizer(h);
    const double min_loss = scalar_models::dt_euler_loss(h, k_star);
    const ScalarLandscape model = [h](double k) -> std::optional<std::pair<double, double>> {
      if (k <= 0.0 || k * h >= 2.0) return std::nullopt;
      return std::pair{scalar_models::dt_euler_loss(h, k), scalar_models::dt_euler_grad(h, k)};
    };
    const auto grid = linspace(1e-3 * (2.0 / h), (1.0 - 1e-3) * (2.0 / h), 4001);
    const double lambda = estimate_sgl_constant(sample_scalar(model, min_loss, grid).samples,
                                                std::numeric_limits<double>::infinity());
    euler = euler && lambda > 0.0 && lambda < prev_h;
    prev_h = lambda;
    hs += (hs.empty() ? "" : ", ") + fmt("%.3g", lambda);
  }
  return {antitone && prev <= 1e-3 && euler,
          std::string(antitone ? "antitone" : "NOT antitone") + ", lambda at k=1e4 " + fmt("%.2e", prev) +
              ", lambda_h " + hs};
}

// 7. sat-PLI fits and the comparison bound
Outcome sat_pli() {
  bool ok = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_excess = 0.0;
  const auto check_fit = [&](const std::vector<Sample>& samples) {
    const PliFit fit = fit_sat_pli(samples);
    double max_g2 = 0.0;
    for (const Sample& s : samples) max_g2 = std::max(max_g2, s.g * s.g);
    const double scaled = fit.slack / (1.0 + max_g2);
    worst_slack = std::min(worst_slack, scaled);
    ok = ok && fit.feasible && scaled >= -1e-12;
    return fit;
  };
  const auto dominate = [&](const PliFit& fit, const Trajectory& t) {
    const auto bound = comparison_bound(fit.fitted, t.regrets.front(), t.times);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double excess = (t.regrets[i] - bound[i]) / std::max(bound[i], 1e-300);
      if (t.regrets[i] > 1e-15) worst_excess = std::max(worst_excess, excess);
      ok = ok && t.regrets[i] <= bound[i] * (1.0 + 1e-6) + 1e-15;
    }
  };

  const LqrProblem integrator = LqrProblem::integrator();
  const PliFit wide = check_fit(integrator_grid(1e4, 4000));
  for (double k0 : {0.2, 2.0, 10.0, 100.0}) {
    FlowSpec spec;
    spec.t_max = 250.0;
    spec.samples = 500;
    spec.stop_grad_tol = 0.0;
    dominate(wide, integrate_flow(integrator, Matrix::scalar(k0), spec));
  }

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = testsupport::random_instance(3000 + seed, 4);
    const Matrix& kopt = inst.prob.optimum().k_opt;
    std::mt19937_64 rng(seed);
    std::vector<Matrix> gains;
    for (int i = 0; i < 60; ++i) gains.push_back(testsupport::random_stabilizing_gain(inst.prob, kopt, rng, 1.0));
    auto samples = sample_gains(inst.prob, gains).samples;
    std::vector<Trajectory> trajs;
    for (std::size_t i = 0; i < 3; ++i) {
      FlowSpec spec;
      spec.t_max = default_horizon(inst.prob);
      spec.samples = 2000;
      trajs.push_back(integrate_flow(inst.prob, i == 0 ? inst.seed : gains[i], spec));
      const auto harvested = sample_trajectory(inst.prob, trajs.back()).samples;
      samples.insert(samples.end(), harvested.begin(), harvested.end());
    }
    const PliFit fit = check_fit(samples);
    for (const Trajectory& t : trajs) dominate(fit, t);
  }
  return {ok, "min scaled slack " + fmt("%.2e", worst_slack) + ", max regret/bound - 1 " + fmt("%.2e", worst_excess)};
}

// 8. imbalance conservation
Outcome imbalance_conservation() {
  double worst = 0.0;
  int runs = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto inst = testsupport::random_instance(4000 + seed, 3);
    for (const std::vector<std::size_t>& kappa :
         {std::vector<std::size_t>{seed}, std::vector<std::size_t>{7 - seed, 1 + seed % 3}}) {
      const FactoredGain init = random_factored_gain(inst.prob, kappa, 0.7, seed);
      const Trajectory t = integrate_flow(inst.prob, init, factored_spec(1000.0, 201));
      worst = std::max(worst, conservation_relative_deviation(t));
      ++runs;
    }
  }
  return {worst <= 1e-6, std::to_string(runs) + " runs, max deviation / (1 + ||C(0)||) " + fmt("%.2e", worst)};
}

// 9. imbalance speed-up on the scalar network
Outcome speed_up() {
  const LqrProblem p = LqrProblem::scalar(-1.0);
  bool ok = true;
  double min_margin = std::numeric_limits<double>::infinity();
  for (double khat : {2.0, 0.8, -0.5}) {
    FlowSpec spec = factored_spec(8.0, 161);
    spec.stop_grad_tol = 0.0;
    const Trajectory bar = integrate_flow(p, scalar_pair_with_imbalance(khat, 0.5), spec);
    const Trajectory tilde = integrate_flow(p, scalar_pair_with_imbalance(khat, 1.5), spec);
    ok = ok && std::fabs(tilde.losses[0] - bar.losses[0]) <= 1e-12 * bar.losses[0];
    for (std::size_t i = 1; i < bar.size(); ++i) {
      ok = ok && tilde.regrets[i] < bar.regrets[i];
      if (bar.times[i] >= 0.1) {
        const double margin = (bar.regrets[i] - tilde.regrets[i]) / bar.regrets[i];
        min_margin = std::min(min_margin, margin);
        ok = ok && margin >= 1e-6;
      }
    }
  }
  return {ok, "3 pairs, min relative margin " + fmt("%.3e", min_margin)};
}

// 10. stable manifold dichotomy
Outcome manifold_dichotomy() {
  const LqrProblem p = LqrProblem::scalar(-1.0);
  const double saddle = 0.5 - (std::sqrt(2.0) - 1.0);
  FlowSpec spec = factored_spec(200.0, 201);
  spec.stop_grad_tol = 1e-10;
  bool ok = true;
  double min_saddle = std::numeric_limits<double>::infinity(), max_g = 0.0;
  std::vector<FactoredGain> on{FactoredGain({Matrix::scalar(0.3), Matrix::scalar(-0.3)}),
                               FactoredGain({Matrix::scalar(0.7), Matrix::scalar(-0.7)}),
                               FactoredGain({Matrix::scalar(0.95), Matrix::scalar(-0.95)})};
  const Matrix k1{{0.3}, {-0.2}, {0.6}};
  on.push_back(FactoredGain({k1, -1.0 * k1.transpose()}));
  for (const FactoredGain& fg : on) {
    const Trajectory t = integrate_flow(p, fg, spec);
    min_saddle = std::min(min_saddle, t.regrets.back() / saddle);
    max_g = std::max(max_g, t.grad_norms.back());
    ok = ok && t.regrets.back() >= 0.1 * saddle && t.grad_norms.back() <= 1e-8;
  }
  double worst_off = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const FactoredGain fg = random_factored_gain(p, {1 + seed % 4}, 1.0, 5000 + seed);
    if (manifold_margin(-1.0, fg) <= 0.0) return {false, "random init landed on the manifold"};
    const Trajectory t = integrate_flow(p, fg, spec);
    worst_off = std::max(worst_off, t.regrets.back());
  }
  ok = ok && worst_off <= 1e-8;
  return {ok, "manifold: regret >= " + fmt("%.3f", min_saddle) + " x saddle, grad <= " + fmt("%.1e", max_g) +
                  "; 100 off-manifold: max regret " + fmt("%.1e", worst_off)};
}

double min_ratio(const Trajectory& t) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.regrets[i] >= 1e-9) m = std::min(m, t.grad_norms[i] * t.grad_norms[i] / t.regrets[i]);
  }
  return m;
}

// 11. gl-PLI recovery on imbalanced sets
Outcome gl_recovery() {
  const LqrProblem p = LqrProblem::scalar(-1.0);
  FlowSpec spec = factored_spec(60.0, 601);
  std::vector<double> ratios;
  const double khats[] = {3.0, 1.5, 0.8, 0.2, -0.5};
  for (double c : {1.0, 2.0}) {
    for (double khat : khats) ratios.push_back(min_ratio(integrate_flow(p, scalar_pair_with_imbalance(khat, c), spec)));
  }
  // fitted on the first half, asserted on all ten
  const double rho = 0.5 * *std::min_element(ratios.begin(), ratios.begin() + 5);
  const double floor_all = *std::min_element(ratios.begin(), ratios.end());
  bool ok = floor_all >= rho;
  double balanced_max = 0.0;
  for (double eps : {0.01, 0.02, 0.03}) {
    const Trajectory t = integrate_flow(p, FactoredGain({Matrix::scalar(eps), Matrix::scalar(eps)}), spec);
    const double m = min_ratio(t);
    balanced_max = std::max(balanced_max, m);
    ok = ok && m < rho / 10.0;
  }
  return {ok, "rho~ " + fmt("%.4f", rho) + ", min over 10 imbalanced " + fmt("%.4f", floor_all) +
                  ", balanced min ratios <= " + fmt("%.2e", balanced_max)};
}

// 12. ISS sweeps
Outcome iss_sweeps() {
  bool ok = true;
  double max_zero_tail = 0.0, max_energy_tail = 0.0;
  const auto sinusoid = [] {
    DisturbanceSpec d;
    d.kind = DisturbanceKind::sinusoid;
    d.amplitude = 1.0;
    return d;
  };
  const std::vector<double> deltas{0.0, 1e-3, 1e-2, 1e-1};
  const auto sweep = [&](const LqrProblem& p, const std::vector<FlowState>& inits) {
    FlowSpec spec;
    spec.t_max = default_horizon(p);
    spec.samples = 801;
    spec.disturbance = sinusoid();
    const GainSweepReport rep = gain_sweep(p, inits, deltas, spec);
    for (const SweepRow& row : rep.rows) {
      if (row.delta == 0.0) max_zero_tail = std::max(max_zero_tail, row.tail);
      ok = ok && !(row.delta == 0.0 && row.tail > 1e-8);
    }
    for (std::size_t d = 1; d < deltas.size(); ++d) ok = ok && rep.gamma_hat[d] >= rep.gamma_hat[d - 1];

    // switched off at t = 5
    FlowSpec energy = spec;
    energy.disturbance->kind = DisturbanceKind::piecewise_step;
    energy.disturbance->switch_times = {5.0};
    energy.disturbance->levels = {1.0, 0.0};
    const GainSweepReport fin = gain_sweep(p, inits, {0.0, 0.05, 0.2}, energy, {1, 0.1});
    for (const SweepRow& row : fin.rows) {
      max_energy_tail = std::max(max_energy_tail, row.tail);
      ok = ok && !row.left_domain && row.tail <= 1e-6;
    }
  };
  sweep(LqrProblem::integrator(), {Matrix::scalar(0.3), Matrix::scalar(2.0), Matrix::scalar(8.0)});
  for (std::uint64_t seed : {3, 6}) {
    const auto inst = testsupport::random_instance(seed, 3);
    std::mt19937_64 rng(seed);
    std::vector<FlowState> inits{inst.seed};
    for (int i = 0; i < 2; ++i) {
      inits.emplace_back(testsupport::random_stabilizing_gain(inst.prob, inst.prob.optimum().k_opt, rng));
    }
    sweep(inst.prob, inits);
  }

  const LqrProblem scalar = LqrProblem::scalar(-1.0);
  std::vector<FactoredGain> inits;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) inits.push_back(random_factored_gain(scalar, {2}, 0.8, seed));
  FlowSpec spec;
  spec.t_max = default_horizon(scalar, FlowKind::factored);
  spec.samples = 801;
  spec.disturbance = sinusoid();
  const auto gain = lffnn_asymptotic_gain(-1.0, 1.0, 1.0, 2, inits, deltas, spec);
  std::string eps;
  for (std::size_t d = 0; d < gain.epsilon_hat.size(); ++d) {
    if (d > 0) ok = ok && gain.epsilon_hat[d] >= gain.epsilon_hat[d - 1];
    eps += (eps.empty() ? "" : ", ") + fmt("%.2e", gain.epsilon_hat[d]);
  }
  return {ok, "delta=0 tail " + fmt("%.1e", max_zero_tail) + ", switched-off tail " + fmt("%.1e", max_energy_tail) +
                  ", eps_hat " + eps};
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t suite_hash() {
  namespace ex = pliflows::experiment;
  const char* configs[] = {
      R"({"command": "flow", "problem": {"builtin": "integrator"}, "k0": 100, "flow": {"t_max": 300, "samples": 600}})",
      R"({"command": "flow", "problem": {"builtin": "planar_zero"}, "k0": [1.5, 0.2, -0.1, 2], "flow": {"kind": "natural"},
          "disturbance": {"kind": "bounded_random", "amplitude": 0.05, "seed": 4}})",
      R"({"command": "lffnn", "problem": {"builtin": "scalar_a", "a": -1}, "factors": [[[0.4], [0.9]], [[0.7, -0.3]]],
          "flow": {"t_max": 50}})",
      R"({"command": "pli", "pli": {"grid": {"from": 0.1, "to": 1e4, "count": 500, "log": true}, "rhos": [0.1, 1, 100]}})",
      R"({"command": "pli", "problem": {"builtin": "planar_zero"}, "k0": [2, 0, 0, 3], "pli": {"source": "trajectory"}})",
      R"({"command": "iss", "seed": 11, "problem": {"builtin": "integrator"}, "disturbance": {"kind": "sinusoid", "amplitude": 1},
          "iss": {"inits": [0.5, 4], "random_inits": 2, "init_scale": 0.3}})",
      R"({"command": "iss", "seed": 5, "problem": {"builtin": "scalar_a", "a": -1}, "disturbance": {"kind": "sinusoid", "amplitude": 1},
          "iss": {"factored": true, "random_inits": 3, "width": 2, "init_scale": 0.8}})",
      R"({"command": "riccati", "problem": {"builtin": "scalar_a", "a": 2, "q": 3, "r": 0.5}})",
      R"({"command": "portrait", "portrait": {"a": 0.5}})",
  };
  std::uint64_t h = 1469598103934665603ull;
  for (const char* text : configs) {
    for (const ex::OutputFile& f : ex::run(ex::resolve(ex::parse_config(text)))) {
      h = fnv1a(fnv1a(h, f.path), f.contents);
    }
  }
  return h;
}

// 13. byte reproducibility
Outcome reproducibility() {
  setenv("PLIFLOWS_THREADS", "1", 1);
  const std::uint64_t first = suite_hash();
  setenv("PLIFLOWS_THREADS", "4", 1);
  const std::uint64_t second = suite_hash();
  unsetenv("PLIFLOWS_THREADS");
  char buf[80];
  std::snprintf(buf, sizeof buf, "FNV-1a %016llx vs %016llx", static_cast<unsigned long long>(first),
                static_cast<unsigned long long>(second));
  return {first == second, buf};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form anchor (scalar integrator)", 1.0, closed_form_anchor},
      {2, "Riccati anchors", 1.0, riccati_anchors},
      {3, "gradient oracle vs central differences", 30.0, gradient_oracle},
      {4, "flow convergence", 120.0, flow_convergence},
      {5, "linear-exponential regime", 0.0, linear_exponential},
      {6, "sgl-PLI monotonicity and vanishing", 0.0, sgl_monotone},
      {7, "sat-PLI fit and comparison bound", 0.0, sat_pli},
      {8, "imbalance conservation", 0.0, imbalance_conservation},
      {9, "imbalance speed-up", 0.0, speed_up},
      {10, "stable-manifold dichotomy", 0.0, manifold_dichotomy},
      {11, "gl-PLI recovery", 0.0, gl_recovery},
      {12, "ISS sweeps", 300.0, iss_sweeps},
      {13, "reproducibility", 0.0, reproducibility},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      out.pass = false;
      out.detail += "; over the " + fmt("%.0f", c.budget_s) + " s budget";
    }
    if (!out.pass) ++failed;
    std::printf("criterion %2d %s  %s [%.2f s]: %s\n", c.id, out.pass ? "PASS" : "FAIL", c.name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
