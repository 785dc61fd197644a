#include "pliflows/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "pliflows/error.hpp"
#include "pliflows/kernels.hpp"

namespace pliflows {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::singular_system: return "SingularSystem";
    case Errc::not_stabilizing: return "NotStabilizing";
    case Errc::no_stabilizing_gain: return "NoStabilizingGain";
    case Errc::not_converged: return "NotConverged";
    case Errc::left_domain: return "LeftDomain";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_sample: return "EmptySample";
    case Errc::degenerate: return "Degenerate";
    case Errc::not_factored: return "NotFactored";
    case Errc::precondition_violated: return "PreconditionViolated";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(Errc::dimension_mismatch, "entry count " + std::to_string(data_.size()) +
                                              " does not match " + std::to_string(rows_) + "x" +
                                              std::to_string(cols_));
  }
  if (!all_finite()) throw Error(Errc::invalid_argument, "matrix entries must be finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(Errc::dimension_mismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw Error(Errc::invalid_argument, "matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  require_square(*this, "trace");
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, i);
  return s;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  kernels::axpy(1.0, other.data_, data_);
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  kernels::axpy(-1.0, other.data_, data_);
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(Errc::dimension_mismatch,
                "product of " + shape_string(a) + " and " + shape_string(b));
  }
  Matrix c(a.rows(), b.cols());
  // Row-oriented product: c[i,:] += a[i,k] * b[k,:].
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik != 0.0) kernels::axpy(aik, b.row(k), out);
    }
  }
  return c;
}

double frobenius_norm(const Matrix& m) { return std::sqrt(kernels::dot(m.data(), m.data())); }

double frobenius_inner(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_inner");
  return kernels::dot(a.data(), b.data());
}

double max_abs(const Matrix& m) noexcept {
  double best = 0.0;
  for (double v : m.data()) best = std::max(best, std::fabs(v));
  return best;
}

Matrix symmetrized(const Matrix& m) {
  require_square(m, "symmetrized");
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* context) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::dimension_mismatch,
                std::string(context) + ": " + shape_string(a) + " vs " + shape_string(b));
  }
}

void require_square(const Matrix& m, const char* context) {
  if (!m.square()) {
    throw Error(Errc::dimension_mismatch,
                std::string(context) + ": expected square matrix, got " + shape_string(m));
  }
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace pliflows
