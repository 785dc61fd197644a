#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "pliflows/experiment.hpp"
#include "pliflows/flow.hpp"
#include "pliflows/iss.hpp"
#include "pliflows/lffnn.hpp"
#include "pliflows/pli.hpp"
#include "pliflows/scalar_models.hpp"

namespace pliflows::experiment {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::invalid_argument:
    case Errc::dimension_mismatch:
    case Errc::not_stabilizing:
    case Errc::no_stabilizing_gain:
    case Errc::precondition_violated:
    case Errc::out_of_domain:
    case Errc::not_factored:
      return 2;
    case Errc::singular_system:
    case Errc::not_converged:
    case Errc::left_domain:
    case Errc::empty_sample:
    case Errc::degenerate:
      return 3;
  }
  return 3;
}

void write_outputs(const std::vector<OutputFile>& files) {
  namespace fs = std::filesystem;
  std::vector<fs::path> staged;
  try {
    for (const OutputFile& f : files) {
      const fs::path target(f.path);
      if (target.has_parent_path()) fs::create_directories(target.parent_path());
      fs::path tmp = target;
      tmp += ".partial";
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << f.contents;
      out.close();
      if (!out) throw Error(Errc::invalid_argument, "cannot write " + tmp.string());
      staged.push_back(tmp);
    }
  } catch (...) {
    std::error_code ec;
    for (const fs::path& p : staged) fs::remove(p, ec);
    throw;
  }
  for (std::size_t i = 0; i < files.size(); ++i) fs::rename(staged[i], files[i].path);
}

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

json state_json(const FlowState& s) {
  if (const auto* fg = std::get_if<FactoredGain>(&s)) {
    json out = json::array();
    for (const Matrix& f : fg->factors()) out.push_back(matrix_json(f));
    return out;
  }
  return matrix_json(std::get<Matrix>(s));
}

double nan() { return std::nan(""); }

FlowSpec flow_spec(const ExperimentConfig& c) {
  FlowSpec s;
  s.kind = flow_kind_from_string(c.flow.kind);
  s.eta = c.flow.eta;
  s.t_max = c.flow.t_max.value_or(100.0);
  s.samples = c.flow.samples;
  s.stop_grad_tol = c.flow.stop_grad_tol;
  s.ode.rtol = c.flow.rtol;
  s.ode.atol = c.flow.atol;
  s.disturbance = c.disturbance;
  return s;
}

std::string trajectory_csv(const Trajectory& traj) {
  const std::size_t nc = traj.imbalances.empty() ? 0 : traj.imbalances.front().size();
  const bool with_u = !traj.u_sup.empty();
  std::string out = "t,loss,regret,grad_norm";
  for (std::size_t i = 1; i <= nc; ++i) out += ",c_" + std::to_string(i);
  if (with_u) out += ",u_sup";
  out += '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out += format_double(traj.times[i]);
    out += ',' + format_double(traj.losses[i]);
    out += ',' + format_double(traj.has_regret() ? traj.regrets[i] : nan());
    out += ',' + format_double(traj.grad_norms[i]);
    for (std::size_t j = 0; j < nc; ++j) out += ',' + format_double(traj.imbalances[i][j]);
    if (with_u) out += ',' + format_double(traj.u_sup[i]);
    out += '\n';
  }
  return out;
}

json trajectory_summary(const Trajectory& traj) {
  const std::size_t last = traj.size() - 1;
  json j;
  j["samples"] = traj.size();
  j["final_time"] = traj.times[last];
  j["final_state"] = state_json(traj.states[last]);
  j["final_loss"] = traj.losses[last];
  j["final_regret"] = traj.has_regret() ? json(traj.regrets[last]) : json();
  j["final_grad_norm"] = traj.grad_norms[last];
  j["initial_regret"] = traj.has_regret() ? json(traj.regrets[0]) : json();
  j["stopped_early"] = traj.stopped_early;
  j["disturbance_sup"] = traj.disturbance_sup;
  j["stats"] = {{"accepted", traj.stats.accepted},
                {"rejected_error", traj.stats.rejected_error},
                {"rejected_domain", traj.stats.rejected_domain},
                {"evaluations", traj.stats.evaluations}};
  return j;
}

std::string dump(const ExperimentConfig& c, const json& result) {
  json root;
  root["version"] = kVersion;
  root["command"] = c.command;
  root["config"] = json::parse(to_json_text(c));
  root["result"] = result;
  return root.dump(2) + "\n";
}

json sample_json(const Sample& s) { return {{"r", s.r}, {"g", s.g}, {"point", s.point}}; }

json fit_json(const PliFit& fit) {
  return {{"a", fit.fitted.a()},
          {"b", fit.fitted.b()},
          {"local_rate", fit.fitted.local_rate()},
          {"best_rate", fit.best_rate},
          {"feasible", fit.feasible},
          {"slack", fit.slack}};
}

std::vector<OutputFile> run_flow(const ExperimentConfig& c, const LqrProblem& prob) {
  const Trajectory traj = integrate_flow(prob, *c.k0, flow_spec(c));
  json result = trajectory_summary(traj);
  if (traj.has_regret()) {
    const OvershootReport o = overshoot_report(traj, traj.regrets.front());
    result["overshoot"] = {{"peak", o.peak},
                           {"time_to_half", o.time_to_half ? json(*o.time_to_half) : json()},
                           {"tail", o.tail}};
  }
  return {{c.output + ".csv", trajectory_csv(traj)}, {c.output + ".json", dump(c, result)}};
}

std::vector<OutputFile> run_lffnn(const ExperimentConfig& c, const LqrProblem& prob) {
  const FactoredGain init(c.factors);
  const Trajectory traj = integrate_flow(prob, init, flow_spec(c));
  json result = trajectory_summary(traj);
  const ImbalanceRecord rec = imbalance(init);
  result["initial_imbalance"] = rec.measures;
  result["initial_imbalance_sqrt"] = rec.sqrt_measures;
  result["conservation_deviation"] = conservation_deviation(traj);
  result["conservation_relative_deviation"] = conservation_relative_deviation(traj);
  result["final_product"] = matrix_json(product(std::get<FactoredGain>(traj.states.back())));
  result["final_product_rank"] = final_product_rank(traj);
  return {{c.output + ".csv", trajectory_csv(traj)}, {c.output + ".json", dump(c, result)}};
}

std::vector<OutputFile> run_pli(const ExperimentConfig& c, const LqrProblem& prob) {
  const PliConfig& p = c.pli;
  SampleSet set;
  if (p.source == "grid") {
    set = sample_gains(prob, [&] {
      std::vector<Matrix> gains;
      for (double k : p.grid.values()) gains.push_back(Matrix::scalar(k));
      return gains;
    }());
  } else if (p.source == "dt_euler") {
    const double h = p.h;
    const double kstar = scalar_models::dt_euler_minimizer(h);
    set = sample_scalar(
        [h](double k) -> std::optional<std::pair<double, double>> {
          if (!(k > 0.0 && k < 2.0 / h)) return std::nullopt;
          return std::make_pair(scalar_models::dt_euler_loss(h, k), scalar_models::dt_euler_grad(h, k));
        },
        scalar_models::dt_euler_loss(h, kstar), p.grid.values());
  } else if (p.source == "trajectory") {
    set = sample_trajectory(prob, integrate_flow(prob, *c.k0, flow_spec(c)));
  } else {
    set = sample_affine_slice(prob, *p.base, *p.d1, *p.d2, p.s.values(), p.t.values());
  }

  ClassifyOptions opt;
  opt.gl_threshold = p.gl_threshold;
  opt.sat.grid_points = p.b_grid_points;
  opt.sat.rate_retention = p.rate_retention;
  const ClassifyReport rep = classify(set.samples, opt);

  json result;
  result["samples"] = set.samples.size();
  result["skipped"] = set.skipped;
  json sgl = json::array();
  for (double rho : p.rhos) {
    json row = {{"rho", rho}};
    try {
      row["lambda"] = estimate_sgl_constant(set.samples, rho);
    } catch (const Error& e) {
      if (e.code() != Errc::empty_sample) throw;
      row["lambda"] = json();
    }
    sgl.push_back(row);
  }
  result["sgl"] = sgl;
  result["sat_fit"] = rep.sat_fit ? fit_json(*rep.sat_fit) : json();
  json witnesses = json::array();
  for (const Witness& w : rep.witnesses) {
    witnesses.push_back({{"class", w.comparison_class}, {"sample", sample_json(w.sample)}});
  }
  result["classify"] = {{"gl_feasible", rep.gl_feasible},
                        {"sat_feasible", rep.sat_feasible},
                        {"kinf_feasible", rep.kinf_feasible},
                        {"pd_feasible", rep.pd_feasible},
                        {"gl_min_ratio", rep.gl_min_ratio},
                        {"witnesses", witnesses}};

  std::string csv = "r,g\n";
  for (const Sample& s : set.samples) csv += format_double(s.r) + ',' + format_double(s.g) + '\n';
  return {{c.output + "_samples.csv", csv}, {c.output + ".json", dump(c, result)}};
}

std::vector<OutputFile> run_iss(const ExperimentConfig& c, const LqrProblem& prob) {
  const IssConfig& s = c.iss;
  SweepOptions opt;
  opt.phases = s.phases;
  opt.tail_fraction = s.tail_fraction;
  const FlowSpec spec = flow_spec(c);

  json result;
  GainSweepReport sweep;
  const bool scalar_network = s.factored && prob.n() == 1 && prob.m() == 1;
  if (scalar_network) {
    std::vector<FactoredGain> inits;
    for (const InitConfig& init : s.inits) inits.emplace_back(init);
    const double a = prob.A()(0, 0) / prob.B()(0, 0);
    const double b2 = prob.B()(0, 0) * prob.B()(0, 0);
    if (b2 != 1.0) {
      throw Error(Errc::precondition_violated, "the network asymptotic-gain sweep assumes b = 1");
    }
    const AsymptoticGainReport rep = lffnn_asymptotic_gain(
        a, prob.Q()(0, 0), prob.R()(0, 0), inits.front()[0].rows(), inits, s.amplitudes, spec, opt);
    result["margins"] = rep.margins;
    result["epsilon_hat"] = rep.epsilon_hat;
    sweep = rep.sweep;
  } else {
    std::vector<FlowState> inits;
    for (const InitConfig& init : s.inits) {
      if (s.factored) {
        inits.emplace_back(FactoredGain(init));
      } else {
        inits.emplace_back(init.front());
      }
    }
    sweep = gain_sweep(prob, inits, s.amplitudes, spec, opt);
  }
  result["deltas"] = sweep.deltas;
  result["gamma_hat"] = sweep.gamma_hat;
  result["destabilized"] = sweep.destabilized;
  json rows = json::array();
  std::string csv = "delta,init,phase,overshoot,tail,left_domain\n";
  for (const SweepRow& r : sweep.rows) {
    rows.push_back({{"delta", r.delta},
                    {"init", r.init_id},
                    {"phase", r.phase_id},
                    {"overshoot", r.left_domain ? json() : json(r.overshoot)},
                    {"tail", r.left_domain ? json() : json(r.tail)},
                    {"left_domain", r.left_domain}});
    csv += format_double(r.delta) + ',' + std::to_string(r.init_id) + ',' +
           std::to_string(r.phase_id) + ',' + format_double(r.left_domain ? nan() : r.overshoot) +
           ',' + format_double(r.left_domain ? nan() : r.tail) + ',' + (r.left_domain ? "1" : "0") +
           '\n';
  }
  result["rows"] = rows;
  return {{c.output + "_sweep.csv", csv}, {c.output + ".json", dump(c, result)}};
}

std::vector<OutputFile> run_riccati(const ExperimentConfig& c, const LqrProblem& prob) {
  const RiccatiSolution& sol = prob.optimum();
  json result = {{"pi", matrix_json(sol.pi)},
                 {"k_opt", matrix_json(sol.k_opt)},
                 {"iterations", sol.iterations},
                 {"optimal_loss", prob.optimal_loss()},
                 {"residual", riccati_residual(prob.A(), prob.B(), prob.Q(), prob.R(), sol.pi)}};
  return {{c.output + ".json", dump(c, result)}};
}

std::vector<OutputFile> run_portrait(const ExperimentConfig& c) {
  const PortraitConfig& p = c.portrait;
  PortraitGrid grid{p.k1.values(), p.k2.values(), p.tol};
  const std::vector<PortraitPoint> pts = scalar_phase_portrait(p.a, p.q, p.r, grid);
  std::string csv = "k1,k2,v1,v2,flag_equilibrium,flag_boundary,flag_manifold\n";
  std::size_t eq = 0, boundary = 0, manifold = 0, outside = 0;
  for (const PortraitPoint& pt : pts) {
    csv += format_double(pt.k1) + ',' + format_double(pt.k2) + ',' + format_double(pt.v1) + ',' +
           format_double(pt.v2) + ',' + (pt.equilibrium ? '1' : '0') + ',' +
           (pt.boundary ? '1' : '0') + ',' + (pt.manifold ? '1' : '0') + '\n';
    eq += pt.equilibrium;
    boundary += pt.boundary;
    manifold += pt.manifold;
    outside += !pt.in_domain;
  }
  json result = {{"points", pts.size()},
                 {"equilibrium_points", eq},
                 {"boundary_points", boundary},
                 {"manifold_points", manifold},
                 {"out_of_domain_points", outside},
                 {"equilibrium_product", scalar_models::scalar_optimal_gain(p.a, p.q, p.r)}};
  return {{c.output + "_portrait.csv", csv}, {c.output + ".json", dump(c, result)}};
}

}  // namespace

std::vector<OutputFile> run(const ExperimentConfig& c) {
  if (c.command == "portrait") return run_portrait(c);
  const LqrProblem prob = build_problem(c.problem);
  if (c.command == "flow") return run_flow(c, prob);
  if (c.command == "lffnn") return run_lffnn(c, prob);
  if (c.command == "pli") return run_pli(c, prob);
  if (c.command == "iss") return run_iss(c, prob);
  if (c.command == "riccati") return run_riccati(c, prob);
  throw Error(Errc::invalid_argument, "unknown command '" + c.command + "'");
}

}  // namespace pliflows::experiment
