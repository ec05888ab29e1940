#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ffnfold {

using Vector = std::vector<double>;

// Dense row-major matrix of 64-bit floats. Model files store 32-bit
// payloads; everything in memory is double.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  Vector col(std::size_t j) const {
    Vector out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = at(i, j);
    return out;
  }

  Vector row_vec(std::size_t i) const {
    return Vector(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
                  data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
  }
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix outer(const Vector& u, const Vector& v);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Closed-form ordinary least squares. Throws "degenerate-range" when the
// x variance is below 1e-12.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

double l2_norm(std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace ffnfold
