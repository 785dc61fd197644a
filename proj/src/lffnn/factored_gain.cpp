#include "pliflows/factored_gain.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "pliflows/error.hpp"

namespace pliflows {

FactoredGain::FactoredGain(std::vector<Matrix> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw Error(Errc::dimension_mismatch, "factored gain needs a factor");
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].empty()) throw Error(Errc::dimension_mismatch, "empty factor");
    if (i + 1 < factors_.size() && factors_[i + 1].cols() != factors_[i].rows()) {
      throw Error(Errc::dimension_mismatch,
                  "factor " + std::to_string(i + 2) + " (" + shape_string(factors_[i + 1]) +
                      ") does not chain with factor " + std::to_string(i + 1) + " (" +
                      shape_string(factors_[i]) + ")");
    }
  }
}

std::size_t FactoredGain::parameter_count() const noexcept {
  return std::accumulate(factors_.begin(), factors_.end(), std::size_t{0},
                         [](std::size_t s, const Matrix& m) { return s + m.size(); });
}

std::vector<double> FactoredGain::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Matrix& f : factors_) flat.insert(flat.end(), f.data().begin(), f.data().end());
  return flat;
}

FactoredGain FactoredGain::with_parameters(std::span<const double> flat) const {
  if (flat.size() != parameter_count()) {
    throw Error(Errc::dimension_mismatch, "parameter vector size");
  }
  FactoredGain out = *this;
  std::size_t offset = 0;
  for (Matrix& f : out.factors_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), f.size(), f.data().begin());
    offset += f.size();
  }
  return out;
}

Matrix product(const FactoredGain& fg) {
  Matrix p = fg[0];
  for (std::size_t i = 1; i < fg.depth(); ++i) p = fg[i] * p;
  return p;
}

FactoredEvaluation evaluate_factored(const LqrProblem& prob, const FactoredGain& fg) {
  const std::size_t depth = fg.depth();
  // prefix[i] = k_{i-1} ... k_1 (identity for i = 0), suffix[i] = k_N ... k_{i+1}.
  std::vector<Matrix> prefix(depth), suffix(depth);
  prefix[0] = Matrix::identity(fg.input_dim());
  for (std::size_t i = 1; i < depth; ++i) prefix[i] = fg[i - 1] * prefix[i - 1];
  suffix[depth - 1] = Matrix::identity(fg.output_dim());
  for (std::size_t i = depth - 1; i-- > 0;) suffix[i] = suffix[i + 1] * fg[i + 1];
  const Matrix k = fg[depth - 1] * prefix[depth - 1];

  FactoredEvaluation out;
  out.at_product = evaluate(prob, k);
  const Matrix& g = out.at_product.gradient;
  out.gradients.reserve(depth);
  double sq = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    Matrix gi = suffix[i].transpose() * g * prefix[i].transpose();
    sq += frobenius_inner(gi, gi);
    out.gradients.push_back(std::move(gi));
  }
  out.gradient_norm = std::sqrt(sq);
  return out;
}

std::vector<Matrix> factored_gradient(const LqrProblem& prob, const FactoredGain& fg) {
  return evaluate_factored(prob, fg).gradients;
}

double imbalance_measure(const Matrix& c) {
  const double fro_sq = frobenius_inner(c, c);
  const double tr = c.trace();
  return std::sqrt(std::fabs(2.0 * fro_sq - tr * tr));
}

ImbalanceRecord imbalance(const FactoredGain& fg) {
  ImbalanceRecord rec;
  for (std::size_t i = 0; i + 1 < fg.depth(); ++i) {
    Matrix c = fg[i] * fg[i].transpose() - fg[i + 1].transpose() * fg[i + 1];
    const double measure = imbalance_measure(c);
    rec.measures.push_back(measure);
    rec.sqrt_measures.push_back(std::sqrt(measure));
    rec.matrices.push_back(std::move(c));
  }
  return rec;
}

}  // namespace pliflows
