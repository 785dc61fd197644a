#include "pliflows/scalar_models.hpp"

#include <cmath>
#include <string>

#include "pliflows/error.hpp"

namespace pliflows::scalar_models {

LossAndGradient ct_integrator_loss(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error(Errc::out_of_domain, "integrator loss needs k > 0, got " + std::to_string(k));
  }
  return {(1.0 + k * k) / (2.0 * k), 0.5 * (1.0 - 1.0 / (k * k))};
}

namespace {
void require_dt_domain(double h, double k) {
  if (!(h > 0.0)) throw Error(Errc::out_of_domain, "Euler step h must be positive");
  if (!(k > 0.0) || !(k * h < 2.0)) {
    throw Error(Errc::out_of_domain, "Euler loss needs 0 < k < 2/h");
  }
}
}  // namespace

double dt_euler_loss(double h, double k) {
  require_dt_domain(h, k);
  return (1.0 + k * k) / (k * (2.0 - k * h));
}

double dt_euler_grad(double h, double k) {
  require_dt_domain(h, k);
  const double d = k * (2.0 - k * h);
  return 2.0 * (k * k + h * k - 1.0) / (d * d);
}

double dt_euler_minimizer(double h) {
  if (!(h > 0.0)) throw Error(Errc::out_of_domain, "Euler step h must be positive");
  // 2 / (h + sqrt(h^2 + 4)) avoids cancellation for small h.
  return 2.0 / (h + std::sqrt(h * h + 4.0));
}

double lffnn_scalar_f(double a, double q, double r, double khat) {
  if (khat == a) throw Error(Errc::out_of_domain, "f is undefined at khat = a");
  const double d = a - khat;
  return (r * khat * khat - 2.0 * a * r * khat - q) / (2.0 * d * d);
}

double scalar_lqr_loss(double a, double q, double r, double khat) {
  if (!(khat > a)) throw Error(Errc::not_stabilizing, "scalar loss needs khat > a");
  return (q + r * khat * khat) / (2.0 * (khat - a));
}

double scalar_optimal_gain(double a, double q, double r) {
  return a + std::sqrt(a * a + q / r);
}

}  // namespace pliflows::scalar_models
