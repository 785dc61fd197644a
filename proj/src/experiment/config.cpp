#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "json.hpp"
#include "pliflows/experiment.hpp"
#include "pliflows/flow.hpp"
#include "pliflows/iss.hpp"
#include "pliflows/lffnn.hpp"
#include "pliflows/pli.hpp"

namespace pliflows::experiment {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::invalid_argument, what); }

// Object reader that rejects keys it was never asked about.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_ + ": expected an object");
  }
  const json* get(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) bad(where_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

double as_double(const json& v, const std::string& name) {
  if (!v.is_number()) bad(name + ": expected a number");
  return v.get<double>();
}

std::size_t as_size(const json& v, const std::string& name) {
  if (!v.is_number_unsigned()) bad(name + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) bad(name + ": expected a string");
  return v.get<std::string>();
}

void read(Fields& f, const char* key, double& out) {
  if (const json* v = f.get(key)) out = as_double(*v, f.where() + "." + key);
}
void read(Fields& f, const char* key, std::optional<double>& out) {
  if (const json* v = f.get(key)) {
    if (v->is_null()) {
      out.reset();
    } else {
      out = as_double(*v, f.where() + "." + key);
    }
  }
}
void read(Fields& f, const char* key, std::size_t& out) {
  if (const json* v = f.get(key)) out = as_size(*v, f.where() + "." + key);
}
void read_u64(Fields& f, const char* key, std::uint64_t& out) {
  if (const json* v = f.get(key)) {
    if (!v->is_number_unsigned()) bad(f.where() + "." + key + ": expected a nonnegative integer");
    out = v->get<std::uint64_t>();
  }
}
void read(Fields& f, const char* key, std::string& out) {
  if (const json* v = f.get(key)) out = as_string(*v, f.where() + "." + key);
}
void read(Fields& f, const char* key, bool& out) {
  if (const json* v = f.get(key)) {
    if (!v->is_boolean()) bad(f.where() + "." + key + ": expected true or false");
    out = v->get<bool>();
  }
}
void read(Fields& f, const char* key, std::vector<double>& out) {
  if (const json* v = f.get(key)) {
    const std::string name = f.where() + "." + key;
    if (!v->is_array()) bad(name + ": expected an array of numbers");
    out.clear();
    for (const json& x : *v) out.push_back(as_double(x, name));
  }
}

// Number -> 1x1, flat array -> 1xN, array of rows -> matrix.
Matrix matrix_from(const json& v, const std::string& name) {
  if (v.is_number()) return Matrix::scalar(as_double(v, name));
  if (!v.is_array() || v.empty()) bad(name + ": expected a number or a nonempty array");
  if (v.front().is_number()) {
    std::vector<double> flat;
    for (const json& x : v) flat.push_back(as_double(x, name));
    const std::size_t n = flat.size();
    return Matrix(1, n, std::move(flat));
  }
  std::vector<double> data;
  const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
  for (const json& row : v) {
    if (!row.is_array() || row.size() != cols || cols == 0) bad(name + ": ragged matrix rows");
    for (const json& x : row) data.push_back(as_double(x, name));
  }
  return Matrix(v.size(), cols, std::move(data));
}

void read(Fields& f, const char* key, std::optional<Matrix>& out) {
  if (const json* v = f.get(key)) {
    if (v->is_null()) {
      out.reset();
    } else {
      out = matrix_from(*v, f.where() + "." + key);
    }
  }
}

std::vector<Matrix> matrices_from(const json& v, const std::string& name) {
  if (!v.is_array()) bad(name + ": expected an array of matrices");
  std::vector<Matrix> out;
  for (const json& m : v) out.push_back(matrix_from(m, name));
  return out;
}

json matrix_to(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

json optional_matrix_to(const std::optional<Matrix>& m) { return m ? matrix_to(*m) : json(); }

json matrices_to(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const Matrix& m : ms) out.push_back(matrix_to(m));
  return out;
}

GridConfig grid_from(const json& v, const std::string& name, GridConfig g) {
  Fields f(v, name);
  read(f, "from", g.from);
  read(f, "to", g.to);
  read(f, "count", g.count);
  read(f, "log", g.log);
  f.finish();
  return g;
}

json grid_to(const GridConfig& g) {
  return {{"from", g.from}, {"to", g.to}, {"count", g.count}, {"log", g.log}};
}

DisturbanceSpec disturbance_from(const json& v) {
  Fields f(v, "disturbance");
  DisturbanceSpec d;
  std::string kind = to_string(d.kind);
  read(f, "kind", kind);
  d.kind = disturbance_kind_from_string(kind);
  read(f, "amplitude", d.amplitude);
  read(f, "frequency", d.frequency);
  read(f, "phase", d.phase);
  read(f, "switch_times", d.switch_times);
  read(f, "levels", d.levels);
  read_u64(f, "seed", d.seed);
  read(f, "bucket_width", d.bucket_width);
  f.finish();
  return d;
}

json disturbance_to(const DisturbanceSpec& d) {
  return {{"kind", to_string(d.kind)},   {"amplitude", d.amplitude},
          {"frequency", d.frequency},    {"phase", d.phase},
          {"switch_times", d.switch_times}, {"levels", d.levels},
          {"seed", d.seed},              {"bucket_width", d.bucket_width}};
}

}  // namespace

std::vector<double> GridConfig::values() const {
  if (count == 0) bad("grid count must be positive");
  if (!std::isfinite(from) || !std::isfinite(to)) bad("grid bounds must be finite");
  if (log && !(from > 0.0 && to > 0.0)) bad("log grid needs positive bounds");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    v[i] = log ? std::exp(std::log(from) + s * (std::log(to) - std::log(from)))
               : from + s * (to - from);
  }
  if (count > 1) {
    v.back() = to;
  }
  return v;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Fields top(root, "config");
  read(top, "command", c.command);
  read(top, "output", c.output);
  read_u64(top, "seed", c.seed);
  read(top, "k0", c.k0);
  if (const json* v = top.get("factors")) c.factors = matrices_from(*v, "config.factors");

  if (const json* v = top.get("problem")) {
    Fields f(*v, "problem");
    ProblemConfig& p = c.problem;
    read(f, "builtin", p.builtin);
    read(f, "a", p.a);
    read(f, "b", p.b);
    read(f, "q", p.q);
    read(f, "r", p.r);
    read(f, "A", p.A);
    read(f, "B", p.B);
    read(f, "Q", p.Q);
    read(f, "R", p.R);
    read(f, "Sigma0", p.sigma0);
    read(f, "seed_gain", p.seed_gain);
    f.finish();
  }
  if (const json* v = top.get("flow")) {
    Fields f(*v, "flow");
    FlowConfig& fl = c.flow;
    read(f, "kind", fl.kind);
    read(f, "eta", fl.eta);
    read(f, "t_max", fl.t_max);
    read(f, "samples", fl.samples);
    read(f, "stop_grad_tol", fl.stop_grad_tol);
    read(f, "rtol", fl.rtol);
    read(f, "atol", fl.atol);
    f.finish();
  }
  if (const json* v = top.get("disturbance")) {
    if (!v->is_null()) c.disturbance = disturbance_from(*v);
  }
  if (const json* v = top.get("pli")) {
    Fields f(*v, "pli");
    PliConfig& p = c.pli;
    read(f, "source", p.source);
    if (const json* g = f.get("grid")) p.grid = grid_from(*g, "pli.grid", p.grid);
    read(f, "h", p.h);
    read(f, "rhos", p.rhos);
    read(f, "base", p.base);
    read(f, "d1", p.d1);
    read(f, "d2", p.d2);
    if (const json* g = f.get("s")) p.s = grid_from(*g, "pli.s", p.s);
    if (const json* g = f.get("t")) p.t = grid_from(*g, "pli.t", p.t);
    read(f, "b_grid_points", p.b_grid_points);
    read(f, "rate_retention", p.rate_retention);
    read(f, "gl_threshold", p.gl_threshold);
    f.finish();
  }
  if (const json* v = top.get("iss")) {
    Fields f(*v, "iss");
    IssConfig& s = c.iss;
    read(f, "amplitudes", s.amplitudes);
    read(f, "phases", s.phases);
    read(f, "tail_fraction", s.tail_fraction);
    read(f, "factored", s.factored);
    read(f, "random_inits", s.random_inits);
    read(f, "init_scale", s.init_scale);
    read(f, "width", s.width);
    if (const json* inits = f.get("inits")) {
      if (!inits->is_array()) bad("iss.inits: expected an array");
      s.inits.clear();
      for (const json& init : *inits) {
        if (s.factored) {
          s.inits.push_back(matrices_from(init, "iss.inits"));
        } else {
          s.inits.push_back({matrix_from(init, "iss.inits")});
        }
      }
    }
    f.finish();
  }
  if (const json* v = top.get("portrait")) {
    Fields f(*v, "portrait");
    PortraitConfig& p = c.portrait;
    read(f, "a", p.a);
    read(f, "q", p.q);
    read(f, "r", p.r);
    if (const json* g = f.get("k1")) p.k1 = grid_from(*g, "portrait.k1", p.k1);
    if (const json* g = f.get("k2")) p.k2 = grid_from(*g, "portrait.k2", p.k2);
    read(f, "tol", p.tol);
    f.finish();
  }
  top.finish();
  return c;
}

std::string to_json_text(const ExperimentConfig& c) {
  json root;
  root["command"] = c.command;
  root["output"] = c.output;
  root["seed"] = c.seed;
  root["k0"] = optional_matrix_to(c.k0);
  root["factors"] = matrices_to(c.factors);
  const ProblemConfig& p = c.problem;
  root["problem"] = {{"builtin", p.builtin},
                     {"a", p.a},
                     {"b", p.b},
                     {"q", p.q},
                     {"r", p.r},
                     {"A", optional_matrix_to(p.A)},
                     {"B", optional_matrix_to(p.B)},
                     {"Q", optional_matrix_to(p.Q)},
                     {"R", optional_matrix_to(p.R)},
                     {"Sigma0", optional_matrix_to(p.sigma0)},
                     {"seed_gain", optional_matrix_to(p.seed_gain)}};
  const FlowConfig& fl = c.flow;
  root["flow"] = {{"kind", fl.kind},       {"eta", fl.eta},
                  {"t_max", fl.t_max ? json(*fl.t_max) : json()},     {"samples", fl.samples},
                  {"stop_grad_tol", fl.stop_grad_tol}, {"rtol", fl.rtol},
                  {"atol", fl.atol}};
  root["disturbance"] = c.disturbance ? disturbance_to(*c.disturbance) : json();
  const PliConfig& pl = c.pli;
  root["pli"] = {{"source", pl.source},
                 {"grid", grid_to(pl.grid)},
                 {"h", pl.h},
                 {"rhos", pl.rhos},
                 {"base", optional_matrix_to(pl.base)},
                 {"d1", optional_matrix_to(pl.d1)},
                 {"d2", optional_matrix_to(pl.d2)},
                 {"s", grid_to(pl.s)},
                 {"t", grid_to(pl.t)},
                 {"b_grid_points", pl.b_grid_points},
                 {"rate_retention", pl.rate_retention},
                 {"gl_threshold", pl.gl_threshold}};
  const IssConfig& s = c.iss;
  json inits = json::array();
  for (const InitConfig& init : s.inits) {
    inits.push_back(s.factored ? matrices_to(init) : matrix_to(init.front()));
  }
  root["iss"] = {{"amplitudes", s.amplitudes},
                 {"phases", s.phases},
                 {"tail_fraction", s.tail_fraction},
                 {"factored", s.factored},
                 {"random_inits", s.random_inits},
                 {"init_scale", s.init_scale},
                 {"width", s.width},
                 {"inits", inits}};
  const PortraitConfig& pt = c.portrait;
  root["portrait"] = {{"a", pt.a},         {"q", pt.q},          {"r", pt.r},
                      {"k1", grid_to(pt.k1)}, {"k2", grid_to(pt.k2)}, {"tol", pt.tol}};
  return root.dump(2);
}

LqrProblem build_problem(const ProblemConfig& p) {
  if (p.builtin == "integrator") return LqrProblem::integrator();
  if (p.builtin == "planar_zero") return LqrProblem::planar_zero();
  if (p.builtin == "scalar_a") return LqrProblem::scalar(p.a, p.b, p.q, p.r);
  if (!p.builtin.empty()) bad("unknown builtin problem '" + p.builtin + "'");
  if (!p.A || !p.B || !p.Q || !p.R) bad("explicit problem needs A, B, Q and R");
  return LqrProblem(*p.A, *p.B, *p.Q, *p.R, p.sigma0, p.seed_gain);
}

namespace {

Matrix shaped_gain(const Matrix& k, std::size_t m, std::size_t n, const std::string& name) {
  if (k.rows() == m && k.cols() == n) return k;
  if (k.size() == m * n) return Matrix(m, n, std::vector<double>(k.data().begin(), k.data().end()));
  throw Error(Errc::dimension_mismatch,
              name + " has " + std::to_string(k.size()) + " entries, expected " +
                  std::to_string(m) + "x" + std::to_string(n));
}

void require(bool ok, const std::string& what) {
  if (!ok) bad(what);
}

}  // namespace

ExperimentConfig resolve(ExperimentConfig c) {
  static const std::set<std::string> commands{"flow", "pli", "lffnn", "iss", "riccati", "portrait"};
  require(commands.count(c.command) > 0, "unknown command '" + c.command + "'");
  if (c.output.empty()) c.output = "pliflows_" + c.command;

  const FlowConfig& fl = c.flow;
  const FlowKind kind = flow_kind_from_string(fl.kind);
  require(fl.eta > 0.0 && std::isfinite(fl.eta), "flow.eta must be > 0");
  if (fl.t_max) require(*fl.t_max > 0.0 && std::isfinite(*fl.t_max), "flow.t_max must be > 0");
  require(fl.samples >= 2, "flow.samples must be >= 2");
  require(fl.stop_grad_tol >= 0.0, "flow.stop_grad_tol must be >= 0");
  require(fl.rtol > 0.0 && fl.atol > 0.0, "flow tolerances must be positive");
  if (c.disturbance) c.disturbance->validate();

  if (c.command == "portrait") {
    if (!c.flow.t_max) c.flow.t_max = 100.0;
    const PortraitConfig& p = c.portrait;
    require(p.q > 0.0 && p.r > 0.0, "portrait.q and portrait.r must be positive");
    require(std::isfinite(p.a), "portrait.a must be finite");
    require(p.tol >= 0.0, "portrait.tol must be >= 0");
    p.k1.values();
    p.k2.values();
    return c;
  }

  const LqrProblem prob = build_problem(c.problem);
  const std::size_t m = prob.m(), n = prob.n();
  if (c.k0) c.k0 = shaped_gain(*c.k0, m, n, "k0");

  if (c.command == "flow") {
    require(c.k0.has_value(), "flow needs k0");
    require(kind != FlowKind::factored, "use the lffnn command for factored flows");
    if (!is_stabilizing(prob, *c.k0)) {
      throw Error(Errc::not_stabilizing, "k0 does not stabilize (A, B)");
    }
  } else if (c.command == "lffnn") {
    require(!c.factors.empty(), "lffnn needs factors");
    c.flow.kind = "factored";
    const FactoredGain fg(c.factors);
    if (fg.input_dim() != n || fg.output_dim() != m) {
      throw Error(Errc::dimension_mismatch, "factor product is not " + std::to_string(m) + "x" +
                                                std::to_string(n));
    }
    if (!is_stabilizing(prob, product(fg))) {
      throw Error(Errc::not_stabilizing, "factor product does not stabilize (A, B)");
    }
  } else if (c.command == "pli") {
    PliConfig& p = c.pli;
    require(p.b_grid_points >= 2, "pli.b_grid_points must be >= 2");
    require(p.rate_retention > 0.0 && p.rate_retention <= 1.0, "pli.rate_retention must be in (0, 1]");
    require(p.gl_threshold >= 0.0, "pli.gl_threshold must be >= 0");
    for (double rho : p.rhos) require(rho > 0.0, "pli.rhos must be positive");
    if (p.source == "grid") {
      require(m == 1 && n == 1, "pli grid source needs a scalar problem");
      p.grid.values();
    } else if (p.source == "dt_euler") {
      require(p.h > 0.0 && std::isfinite(p.h), "pli.h must be > 0");
      p.grid.values();
    } else if (p.source == "trajectory") {
      require(c.k0.has_value(), "pli trajectory source needs k0");
      require(kind != FlowKind::factored, "pli trajectory source needs a plain flow kind");
      if (!is_stabilizing(prob, *c.k0)) {
        throw Error(Errc::not_stabilizing, "k0 does not stabilize (A, B)");
      }
    } else if (p.source == "slice") {
      require(p.base && p.d1 && p.d2, "pli slice source needs base, d1 and d2");
      p.base = shaped_gain(*p.base, m, n, "pli.base");
      p.d1 = shaped_gain(*p.d1, m, n, "pli.d1");
      p.d2 = shaped_gain(*p.d2, m, n, "pli.d2");
      p.s.values();
      p.t.values();
    } else {
      bad("unknown pli source '" + p.source + "'");
    }
  } else if (c.command == "iss") {
    IssConfig& s = c.iss;
    require(s.init_scale > 0.0 && std::isfinite(s.init_scale), "iss.init_scale must be > 0");
    require(s.width > 0, "iss.width must be positive");
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, s.init_scale);
    for (std::size_t i = 0; i < s.random_inits; ++i) {
      if (s.factored) {
        s.inits.push_back(random_factored_gain(prob, {s.width}, s.init_scale, rng()).factors());
        continue;
      }
      for (int attempt = 0;; ++attempt) {
        if (attempt == 10000) throw Error(Errc::no_stabilizing_gain, "no stabilizing random init");
        Matrix k = prob.optimum().k_opt;
        for (double& v : k.data()) v += normal(rng);
        if (is_stabilizing(prob, k)) {
          s.inits.push_back({k});
          break;
        }
      }
    }
    s.random_inits = 0;
    require(!s.inits.empty(), "iss needs inits");
    require(s.phases > 0, "iss.phases must be positive");
    require(s.tail_fraction > 0.0 && s.tail_fraction <= 1.0, "iss.tail_fraction must be in (0, 1]");
    require(!s.amplitudes.empty() &&
                std::find(s.amplitudes.begin(), s.amplitudes.end(), 0.0) != s.amplitudes.end(),
            "iss.amplitudes must include 0");
    for (std::size_t i = 1; i < s.amplitudes.size(); ++i) {
      require(s.amplitudes[i] > s.amplitudes[i - 1], "iss.amplitudes must be strictly increasing");
    }
    require(c.disturbance.has_value(), "iss needs a disturbance template");
    if (s.factored) c.flow.kind = "factored";
    for (std::size_t i = 0; i < s.inits.size(); ++i) {
      InitConfig& init = s.inits[i];
      Matrix k;
      if (s.factored) {
        k = product(FactoredGain(init));
        if (k.rows() != m || k.cols() != n) {
          throw Error(Errc::dimension_mismatch, "iss init " + std::to_string(i) + " has the wrong product shape");
        }
      } else {
        init.front() = shaped_gain(init.front(), m, n, "iss init " + std::to_string(i));
        k = init.front();
      }
      if (!is_stabilizing(prob, k)) {
        throw Error(Errc::not_stabilizing, "iss init " + std::to_string(i) + " is not stabilizing");
      }
    }
  }
  if (c.command != "riccati" && c.command != "portrait") {
    // Regret needs the optimum; surface a missing seed gain as a config error.
    prob.optimum();
  }
  if (!c.flow.t_max) {
    c.flow.t_max = c.command == "iss"
                       ? default_horizon(prob, flow_kind_from_string(c.flow.kind), c.flow.eta)
                       : 100.0;
  }
  return c;
}

}  // namespace pliflows::experiment
