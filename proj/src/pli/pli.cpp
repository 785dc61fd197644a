#include "pliflows/pli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pliflows/error.hpp"

namespace pliflows {
namespace {

void require_nonempty(const SampleSet& set, const char* what) {
  if (set.samples.empty()) {
    throw Error(Errc::empty_sample,
                std::string(what) + ": no admissible point (" + std::to_string(set.skipped) +
                    " skipped)");
  }
}

std::vector<double> entries(const Matrix& k) { return {k.data().begin(), k.data().end()}; }

void add_gain(const LqrProblem& prob, const Matrix& k, SampleSet& out) {
  if (!is_stabilizing(prob, k)) {
    ++out.skipped;
    return;
  }
  const GainEvaluation ev = evaluate(prob, k);
  out.samples.push_back({regret_from_loss(prob, ev.loss), frobenius_norm(ev.gradient), entries(k)});
}

double median_positive_r(const std::vector<Sample>& samples) {
  std::vector<double> r;
  for (const Sample& s : samples) {
    if (s.r > kRegretFloor) r.push_back(s.r);
  }
  if (r.empty()) return 0.0;
  const auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
  std::nth_element(r.begin(), mid, r.end());
  return *mid;
}

}  // namespace

SampleSet sample_scalar(const ScalarLandscape& model, double min_loss,
                        const std::vector<double>& grid) {
  SampleSet out;
  for (double k : grid) {
    const auto lg = model(k);
    if (!lg) {
      ++out.skipped;
      continue;
    }
    double r = lg->first - min_loss;
    if (std::fabs(r) <= kRegretFloor) r = 0.0;
    out.samples.push_back({r, std::fabs(lg->second), {k}});
  }
  require_nonempty(out, "scalar landscape");
  return out;
}

SampleSet sample_gains(const LqrProblem& prob, const std::vector<Matrix>& gains) {
  SampleSet out;
  for (const Matrix& k : gains) add_gain(prob, k, out);
  require_nonempty(out, "gain list");
  return out;
}

SampleSet sample_affine_slice(const LqrProblem& prob, const Matrix& base, const Matrix& d1,
                              const Matrix& d2, const std::vector<double>& s_values,
                              const std::vector<double>& t_values) {
  require_same_shape(base, d1, "affine slice");
  require_same_shape(base, d2, "affine slice");
  SampleSet out;
  for (double s : s_values) {
    for (double t : t_values) add_gain(prob, base + s * d1 + t * d2, out);
  }
  require_nonempty(out, "affine slice");
  return out;
}

SampleSet sample_trajectory(const LqrProblem& prob, const Trajectory& traj) {
  SampleSet out;
  for (const FlowState& state : traj.states) {
    const Matrix k = std::holds_alternative<FactoredGain>(state)
                         ? product(std::get<FactoredGain>(state))
                         : std::get<Matrix>(state);
    add_gain(prob, k, out);
  }
  require_nonempty(out, "trajectory");
  return out;
}

double estimate_sgl_constant(const std::vector<Sample>& samples, double rho) {
  double lambda = std::numeric_limits<double>::infinity();
  for (const Sample& s : samples) {
    if (s.r > kRegretFloor && s.r <= rho) lambda = std::min(lambda, s.g * s.g / s.r);
  }
  if (!std::isfinite(lambda)) {
    throw Error(Errc::empty_sample, "no sample with regret in (0, rho]");
  }
  return lambda;
}

PliFit fit_sat_pli(const std::vector<Sample>& samples, const SatFitOptions& options) {
  if (options.grid_points < 2 || !(options.span_lo > 0.0) || !(options.span_hi > options.span_lo) ||
      !(options.rate_retention > 0.0 && options.rate_retention <= 1.0)) {
    throw Error(Errc::invalid_argument, "bad sat-PLI fit options");
  }
  const double r_med = median_positive_r(samples);
  if (!(r_med > 0.0)) throw Error(Errc::empty_sample, "sat-PLI fit needs samples with r > 0");
  for (const Sample& s : samples) {
    if (s.r > kRegretFloor && s.g <= 1e-12) {
      throw Error(Errc::degenerate,
                  "zero gradient at positive regret r = " + std::to_string(s.r));
    }
  }

  const std::size_t n = options.grid_points;
  std::vector<double> bs(n), as(n);
  const double lo = std::log(options.span_lo), hi = std::log(options.span_hi);
  for (std::size_t j = 0; j < n; ++j) {
    bs[j] = r_med * std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1));
    double a = std::numeric_limits<double>::infinity();
    for (const Sample& s : samples) {
      if (s.r > kRegretFloor) a = std::min(a, s.g * s.g * (bs[j] + s.r) / s.r);
    }
    as[j] = a;
  }
  double best_rate = 0.0;
  for (std::size_t j = 0; j < n; ++j) best_rate = std::max(best_rate, as[j] / bs[j]);
  if (!(best_rate > 0.0) || !std::isfinite(best_rate)) {
    throw Error(Errc::degenerate, "no positive sat-PLI constant admitted by the samples");
  }
  std::size_t pick = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (as[j] / bs[j] >= options.rate_retention * best_rate) pick = j;
  }

  PliFit fit;
  fit.samples = samples;
  fit.fitted = ComparisonFn::sat_pli(as[pick], bs[pick]);
  fit.best_rate = best_rate;
  double slack = std::numeric_limits<double>::infinity();
  double max_g2 = 0.0;
  for (const Sample& s : samples) {
    slack = std::min(slack, s.g * s.g - fit.fitted.squared(s.r));
    max_g2 = std::max(max_g2, s.g * s.g);
  }
  fit.slack = slack;
  fit.feasible = slack >= -1e-12 * (1.0 + max_g2);
  return fit;
}

ClassifyReport classify(const std::vector<Sample>& samples, const ClassifyOptions& options) {
  if (samples.empty()) throw Error(Errc::empty_sample, "classify needs samples");
  ClassifyReport rep;

  // gl: min g^2/r over r > 0.
  const Sample* gl_arg = nullptr;
  double gl_min = std::numeric_limits<double>::infinity();
  for (const Sample& s : samples) {
    if (s.r <= kRegretFloor) continue;
    const double ratio = s.g * s.g / s.r;
    if (ratio < gl_min) {
      gl_min = ratio;
      gl_arg = &s;
    }
  }
  rep.gl_min_ratio = gl_arg ? gl_min : 0.0;
  rep.gl_feasible = gl_arg && gl_min > options.gl_threshold;
  if (!rep.gl_feasible && gl_arg) rep.witnesses.push_back({"gl", *gl_arg});

  // pd: no zero gradient away from the minimum.
  const Sample* pd_arg = nullptr;
  for (const Sample& s : samples) {
    if (s.r > options.pd_tol && s.g <= 1e-12) {
      pd_arg = &s;
      break;
    }
  }
  rep.pd_feasible = pd_arg == nullptr;
  if (pd_arg) rep.witnesses.push_back({"pd", *pd_arg});

  // sat: from the b-grid fit.
  try {
    PliFit fit = fit_sat_pli(samples, options.sat);
    rep.sat_feasible = fit.feasible;
    if (!fit.feasible) {
      const Sample* worst = &samples.front();
      double worst_slack = std::numeric_limits<double>::infinity();
      for (const Sample& s : samples) {
        const double sl = s.g * s.g - fit.fitted.squared(s.r);
        if (sl < worst_slack) {
          worst_slack = sl;
          worst = &s;
        }
      }
      rep.witnesses.push_back({"sat", *worst});
    }
    rep.sat_fit = std::move(fit);
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate && e.code() != Errc::empty_sample) throw;
    rep.sat_feasible = false;
    rep.witnesses.push_back({"sat", pd_arg ? *pd_arg : samples.front()});
  }

  // kinf: does the lower envelope of g keep growing with r?
  std::vector<const Sample*> pos;
  for (const Sample& s : samples) {
    if (s.r > options.pd_tol) pos.push_back(&s);
  }
  std::sort(pos.begin(), pos.end(), [](const Sample* x, const Sample* y) { return x->r < y->r; });
  if (pos.size() >= 10) {
    const std::size_t decile = pos.size() / 10;
    double first_max = 0.0;
    for (std::size_t i = 0; i < decile; ++i) first_max = std::max(first_max, pos[i]->g);
    const Sample* last_arg = pos.back();
    for (std::size_t i = pos.size() - decile; i < pos.size(); ++i) {
      if (pos[i]->g < last_arg->g) last_arg = pos[i];
    }
    rep.kinf_feasible = rep.pd_feasible && last_arg->g > 2.0 * first_max;
    if (!rep.kinf_feasible) rep.witnesses.push_back({"kinf", *last_arg});
  } else if (!pos.empty()) {
    rep.witnesses.push_back({"kinf", *pos.back()});
  }
  return rep;
}

}  // namespace pliflows
