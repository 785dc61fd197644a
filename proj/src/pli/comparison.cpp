#include "pliflows/comparison.hpp"

#include <algorithm>
#include <cmath>

#include "pliflows/error.hpp"

namespace pliflows {
namespace {
void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(Errc::invalid_argument, std::string(what) + " must be positive and finite");
  }
}
}  // namespace

ComparisonFn ComparisonFn::gl_pli(double lambda) {
  require_positive(lambda, "gl-PLI lambda");
  return ComparisonFn(Variant::gl_pli, lambda, 0.0);
}

ComparisonFn ComparisonFn::sat_pli(double a, double b) {
  require_positive(a, "sat-PLI a");
  require_positive(b, "sat-PLI b");
  return ComparisonFn(Variant::sat_pli, a, b);
}

ComparisonFn ComparisonFn::pd_squared(double a, double b) {
  require_positive(a, "pd-squared a");
  require_positive(b, "pd-squared b");
  return ComparisonFn(Variant::pd_squared, a, b);
}

ComparisonFn ComparisonFn::empirical(std::vector<std::pair<double, double>> table) {
  std::sort(table.begin(), table.end());
  for (const auto& [r, alpha] : table) {
    if (!(r >= 0.0) || !(alpha >= 0.0) || !std::isfinite(r) || !std::isfinite(alpha)) {
      throw Error(Errc::invalid_argument, "empirical table entries must be nonnegative");
    }
  }
  if (table.empty() || table.front().first > 0.0) {
    table.insert(table.begin(), {0.0, 0.0});
  } else if (table.front().second != 0.0) {
    throw Error(Errc::invalid_argument, "empirical comparison function needs alpha(0) = 0");
  }
  ComparisonFn fn(Variant::empirical, 0.0, 0.0);
  fn.table_ = std::move(table);
  return fn;
}

double ComparisonFn::squared(double r) const {
  r = std::max(r, 0.0);
  switch (variant_) {
    case Variant::gl_pli: return a_ * r;
    case Variant::sat_pli: return a_ * r / (b_ + r);
    case Variant::pd_squared: return a_ * r / ((b_ + r) * (b_ + r));
    case Variant::empirical: {
      const double alpha = (*this)(r);
      return alpha * alpha;
    }
  }
  return 0.0;
}

double ComparisonFn::operator()(double r) const {
  if (variant_ != Variant::empirical) return std::sqrt(squared(r));
  r = std::max(r, 0.0);
  const auto it = std::upper_bound(table_.begin(), table_.end(), r,
                                   [](double x, const auto& p) { return x < p.first; });
  if (it == table_.end()) return table_.back().second;
  const auto& [r1, a1] = *it;
  const auto& [r0, a0] = *(it - 1);
  if (r1 == r0) return a1;
  return a0 + (a1 - a0) * (r - r0) / (r1 - r0);
}

double ComparisonFn::local_rate() const {
  switch (variant_) {
    case Variant::gl_pli: return a_;
    case Variant::sat_pli: return a_ / b_;
    case Variant::pd_squared: return a_ / (b_ * b_);
    case Variant::empirical: {
      if (table_.size() < 2 || table_[1].first <= 0.0) return 0.0;
      const double slope = table_[1].second / table_[1].first;
      return slope * slope * table_[1].first;
    }
  }
  return 0.0;
}

std::string_view ComparisonFn::comparison_class() const noexcept {
  switch (variant_) {
    case Variant::gl_pli: return "K_inf";
    case Variant::sat_pli: return "K";
    case Variant::pd_squared: return "PD";
    case Variant::empirical: return "PD";
  }
  return "PD";
}

std::string_view ComparisonFn::name() const noexcept {
  switch (variant_) {
    case Variant::gl_pli: return "gl_pli";
    case Variant::sat_pli: return "sat_pli";
    case Variant::pd_squared: return "pd_squared";
    case Variant::empirical: return "empirical";
  }
  return "empirical";
}

}  // namespace pliflows
