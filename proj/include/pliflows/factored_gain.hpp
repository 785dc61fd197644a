#pragma once

#include <span>
#include <vector>

#include "pliflows/lqr.hpp"
#include "pliflows/matrix.hpp"

namespace pliflows {

// Gain realized by a linear feedforward network, u = k_N ... k_2 k_1 x, with
// k_1 of size kappa_1 x n, k_i of size kappa_i x kappa_{i-1}, k_N of size m x kappa_{N-1}.
class FactoredGain {
 public:
  // Throws DimensionMismatch unless adjacent factors chain.
  explicit FactoredGain(std::vector<Matrix> factors);

  std::size_t depth() const noexcept { return factors_.size(); }
  const std::vector<Matrix>& factors() const noexcept { return factors_; }
  const Matrix& operator[](std::size_t i) const noexcept { return factors_[i]; }
  std::size_t input_dim() const noexcept { return factors_.front().cols(); }
  std::size_t output_dim() const noexcept { return factors_.back().rows(); }
  std::size_t parameter_count() const noexcept;

  // Factors concatenated in order, each row-major.
  std::vector<double> flatten() const;
  // Same layout as *this, entries taken from flat.
  FactoredGain with_parameters(std::span<const double> flat) const;

 private:
  std::vector<Matrix> factors_;
};

// k_N ... k_1.
Matrix product(const FactoredGain& fg);

struct FactoredEvaluation {
  GainEvaluation at_product;
  std::vector<Matrix> gradients;  // one per factor, same shapes as the factors
  double gradient_norm = 0.0;     // Frobenius norm over all factors
};

// Chain rule: grad_{k_i} L = (k_N...k_{i+1})' G (k_{i-1}...k_1)' with G the
// LQR gradient at the product. Throws NotStabilizing.
FactoredEvaluation evaluate_factored(const LqrProblem& prob, const FactoredGain& fg);
std::vector<Matrix> factored_gradient(const LqrProblem& prob, const FactoredGain& fg);

struct ImbalanceRecord {
  // C_i = k_i k_i' - k_{i+1}' k_{i+1}, i = 1..N-1.
  std::vector<Matrix> matrices;
  // c_i = sqrt|sum_j lambda_j^2 - 2 sum_{j<l} lambda_j lambda_l| = sqrt|2||C_i||_F^2 - tr(C_i)^2|.
  std::vector<double> measures;
  // sqrt(c_i); for kappa = 1 this is sqrt|k_1^2 - k_2^2|.
  std::vector<double> sqrt_measures;
};

ImbalanceRecord imbalance(const FactoredGain& fg);

// Eigenvalue concentration measure of one symmetric matrix.
double imbalance_measure(const Matrix& c);

}  // namespace pliflows
