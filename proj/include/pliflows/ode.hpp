#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pliflows::ode {

// Right-hand side of y' = F(t, y). An implementation signals that y lies
// outside the admissible domain by throwing Error(Errc::not_stabilizing);
// the integrator then rejects the step and halves it.
class System {
 public:
  virtual ~System() = default;
  virtual std::size_t dim() const = 0;
  virtual void derivative(double t, std::span<const double> y, std::span<double> dy) const = 0;
};

struct Options {
  double rtol = 1e-8;
  double atol = 1e-10;
  int max_domain_halvings = 40;
  std::size_t max_steps = 20'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected_error = 0;
  std::size_t rejected_domain = 0;
  std::size_t evaluations = 0;
};

struct Result {
  double t = 0.0;
  std::vector<double> y;
  bool stopped_early = false;
  Stats stats;
};

// Called at every output time (exactly hit). The first output time must equal
// the initial time.
using OutputFn = std::function<void(double t, std::span<const double> y)>;
// Called after every accepted step; returning true ends the integration.
using StopFn = std::function<bool(double t, std::span<const double> y)>;

// Dormand-Prince 5(4) with a PI step-size controller. Steps are clipped so
// that each output time is reached exactly. Throws LeftDomain after
// max_domain_halvings consecutive domain rejections, NotConverged if the step
// size underflows or max_steps is exceeded.
Result integrate(const System& system, std::vector<double> y0, std::span<const double> output_times,
                 const OutputFn& on_output, const StopFn& should_stop = {},
                 const Options& options = {});

// Evenly spaced grid 0, t_max/(count-1), ..., t_max.
std::vector<double> uniform_grid(double t_max, std::size_t count);

}  // namespace pliflows::ode
