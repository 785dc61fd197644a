#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pliflows/disturbance.hpp"
#include "pliflows/error.hpp"
#include "pliflows/lqr.hpp"
#include "pliflows/matrix.hpp"

namespace pliflows::experiment {

inline constexpr const char* kVersion = "0.1.0";

struct ProblemConfig {
  // "integrator", "planar_zero", "scalar_a", or empty for explicit matrices.
  std::string builtin = "integrator";
  double a = 0.0, b = 1.0, q = 1.0, r = 1.0;  // scalar_a only
  std::optional<Matrix> A, B, Q, R, sigma0, seed_gain;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct FlowConfig {
  std::string kind = "gradient";
  double eta = 1.0;
  // Absent: the iss default horizon for iss runs, 100 otherwise. Always set
  // after resolve.
  std::optional<double> t_max;
  std::size_t samples = 400;
  double stop_grad_tol = 1e-9;
  double rtol = 1e-8;
  double atol = 1e-10;

  friend bool operator==(const FlowConfig&, const FlowConfig&) = default;
};

struct GridConfig {
  double from = 0.1;
  double to = 10.0;
  std::size_t count = 100;
  bool log = false;

  std::vector<double> values() const;
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct PliConfig {
  // "grid" (scalar gains), "dt_euler", "trajectory" (flow from k0) or "slice".
  std::string source = "grid";
  GridConfig grid;
  double h = 0.1;  // dt_euler step
  std::vector<double> rhos;
  std::optional<Matrix> base, d1, d2;  // slice
  GridConfig s, t;
  std::size_t b_grid_points = 64;
  double rate_retention = 0.9;
  double gl_threshold = 1e-8;

  friend bool operator==(const PliConfig&, const PliConfig&) = default;
};

// A plain gain has one matrix; a factored init lists k_1 ... k_N.
using InitConfig = std::vector<Matrix>;

struct IssConfig {
  std::vector<double> amplitudes{0.0, 1e-3, 1e-2, 1e-1};
  std::size_t phases = 3;
  double tail_fraction = 0.1;
  std::vector<InitConfig> inits;
  bool factored = false;  // inits are factorizations
  // Extra inits drawn from config.seed during resolve and appended to inits:
  // k_opt + init_scale * N(0, 1) entries, or random factorizations of hidden
  // width `width` with N(0, init_scale^2) entries.
  std::size_t random_inits = 0;
  double init_scale = 1.0;
  std::size_t width = 1;

  friend bool operator==(const IssConfig&, const IssConfig&) = default;
};

struct PortraitConfig {
  double a = -1.0, q = 1.0, r = 1.0;
  GridConfig k1{-2.0, 2.0, 41, false};
  GridConfig k2{-2.0, 2.0, 41, false};
  double tol = 0.0;

  friend bool operator==(const PortraitConfig&, const PortraitConfig&) = default;
};

struct ExperimentConfig {
  std::string command = "flow";  // flow, pli, lffnn, iss, riccati, portrait
  ProblemConfig problem;
  FlowConfig flow;
  std::optional<Matrix> k0;
  std::vector<Matrix> factors;  // lffnn init
  std::optional<DisturbanceSpec> disturbance;
  PliConfig pli;
  IssConfig iss;
  PortraitConfig portrait;
  std::string output;  // path prefix; empty means "pliflows_<command>"
  std::uint64_t seed = 0;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// JSON text <-> config. Parsing fills defaults for absent fields and throws
// Error(InvalidArgument) on malformed input or unknown keys.
ExperimentConfig parse_config(const std::string& json_text);
std::string to_json_text(const ExperimentConfig& config);

LqrProblem build_problem(const ProblemConfig& config);

// Validates every field against the module preconditions and reshapes flat
// gains to the problem's m x n. Throws Error before any run starts.
ExperimentConfig resolve(ExperimentConfig config);

struct OutputFile {
  std::string path;
  std::string contents;
};

// Runs a resolved config; returns the files to write, in order.
std::vector<OutputFile> run(const ExperimentConfig& config);

// Exit code for an error: 2 for validation errors, 3 for runtime failures.
int exit_code_for(const Error& e);

// Writes every file or none: contents are staged first.
void write_outputs(const std::vector<OutputFile>& files);

// 17 significant digits, "nan"/"inf" spelled out.
std::string format_double(double v);

}  // namespace pliflows::experiment
