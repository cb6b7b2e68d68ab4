#include "cvse/num/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvse/errors.hpp"

namespace cvse::num {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) : rows_(rows.size()) {
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(const Vector& v) { return Matrix(v.dim(), 1, v.values()); }

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector linear_forward(const Vector& x, const Matrix& weight, const Vector& bias) {
  if (weight.cols() != x.dim() || weight.rows() != bias.dim()) {
    throw ShapeError("linear_forward: W is " + std::to_string(weight.rows()) + "x" +
                     std::to_string(weight.cols()) + ", x has " + std::to_string(x.dim()) +
                     ", b has " + std::to_string(bias.dim()));
  }
  Vector out(weight.rows());
  for (std::size_t r = 0; r < weight.rows(); ++r) out[r] = dot(weight.row(r), x.span()) + bias[r];
  return out;
}

Vector softmax(const Vector& z) {
  if (z.empty()) throw ShapeError("softmax: empty input");
  const double m = *std::max_element(z.values().begin(), z.values().end());
  Vector out(z.dim());
  double total = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    out[i] = std::exp(z[i] - m);
    total += out[i];
  }
  for (std::size_t i = 0; i < z.dim(); ++i) out[i] /= total;
  return out;
}

Vector l2_normalize(const Vector& v, double eps) {
  const double denom = std::max(l2_norm(v.span()), eps);
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i] / denom;
  return out;
}

double sq_l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("sq_l2_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace cvse::num
