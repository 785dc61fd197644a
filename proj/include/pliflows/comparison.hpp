#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace pliflows {

// Lower-bound function alpha in ||grad L(k)|| >= alpha(L(k) - L_min).
class ComparisonFn {
 public:
  enum class Variant { gl_pli, sat_pli, pd_squared, empirical };

  // alpha(r) = sqrt(lambda r); class K-infinity.
  static ComparisonFn gl_pli(double lambda);
  // alpha(r) = sqrt(a r / (b + r)); class K, saturates at sqrt(a).
  static ComparisonFn sat_pli(double a, double b);
  // alpha(r) = sqrt(a r / (b + r)^2); positive definite, not monotone.
  static ComparisonFn pd_squared(double a, double b);
  // Piecewise-linear interpolation of (r, alpha) pairs sorted by r, with
  // alpha(0) = 0 and constant extrapolation past the last point.
  static ComparisonFn empirical(std::vector<std::pair<double, double>> table);

  Variant variant() const noexcept { return variant_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double lambda() const noexcept { return a_; }
  const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

  // alpha(r); r < 0 is treated as 0.
  double operator()(double r) const;
  double squared(double r) const;

  // Small-r exponential rate lim alpha(r)^2 / r (a/b for sat_pli).
  double local_rate() const;
  // "K_inf", "K" or "PD".
  std::string_view comparison_class() const noexcept;
  std::string_view name() const noexcept;

 private:
  ComparisonFn(Variant v, double a, double b) : variant_(v), a_(a), b_(b) {}

  Variant variant_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

}  // namespace pliflows
