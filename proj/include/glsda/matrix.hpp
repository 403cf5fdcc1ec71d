#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace glsda {

// Dense row-major double matrix. Small by design; everything in the
// training path fits comfortably in memory.
struct Matrix {
  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

}  // namespace glsda
