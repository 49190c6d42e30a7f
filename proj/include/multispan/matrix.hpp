#ifndef MULTISPAN_MATRIX_HPP
#define MULTISPAN_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace multispan {

using Vector = std::vector<double>;

// Dense row-major matrix. The heads in this project are tiny (feature
// dim tens, a handful of outputs), so plain loops are all we need.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) {
    return std::span<double>(data).subspan(i * cols, cols);
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data).subspan(i * cols, cols);
  }

  bool operator==(const Matrix& other) const = default;
};

// y = M x
Vector matvec(const Matrix& m, std::span<const double> x);

bool all_finite(const Matrix& m);
bool all_finite(std::span<const double> v);

}  // namespace multispan

#endif  // MULTISPAN_MATRIX_HPP
