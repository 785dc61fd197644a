#pragma once

namespace pliflows::scalar_models {

struct LossAndGradient {
  double loss;
  double grad;
};

// Integrator xdot = u, u = -k x, x(0) = 1, unit costs:
// loss (1 + k^2) / (2k), derivative (1 - 1/k^2) / 2. Requires k > 0.
LossAndGradient ct_integrator_loss(double k);

// Forward-Euler discretization of the same problem with step h:
// (1 + k^2) / (k (2 - k h)) on 0 < k < 2/h.
double dt_euler_loss(double h, double k);
// d/dk of dt_euler_loss: 2 (k^2 + h k - 1) / (k (2 - k h))^2.
double dt_euler_grad(double h, double k);
// Root of k^2 + h k - 1 = 0 in (0, 2/h).
double dt_euler_minimizer(double h);

// Scalar plant xdot = a x + u with costs q, r, evaluated at the product gain
// khat: (r khat^2 - 2 a r khat - q) / (2 (a - khat)^2), the derivative of the
// reduced loss (q + r khat^2) / (2 (khat - a)).
double lffnn_scalar_f(double a, double q, double r, double khat);

// (q + r khat^2) / (2 (khat - a)); requires khat > a.
double scalar_lqr_loss(double a, double q, double r, double khat);

// a + sqrt(a^2 + q/r), the positive root of f.
double scalar_optimal_gain(double a, double q, double r);

}  // namespace pliflows::scalar_models
