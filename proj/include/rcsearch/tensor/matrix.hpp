#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rcs::tensor {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape &) const = default;
  std::string to_string() const { return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]"; }
};

// Dense row-major matrix of doubles. Every tensor in the library is 2-D;
// vectors are 1xN rows or Nx1 columns and scalars are 1x1.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape_{rows, cols}, data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  const Shape &shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::vector<double> &storage() { return data_; }
  const std::vector<double> &storage() const { return data_; }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_.cols + c]; }
  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * shape_.cols, shape_.cols}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * shape_.cols, shape_.cols}; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void resize_zero(std::size_t rows, std::size_t cols) {
    shape_ = {rows, cols};
    data_.assign(rows * cols, 0.0);
  }

  Matrix &operator+=(const Matrix &other);

  bool operator==(const Matrix &other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Contiguous row ranges: segment s spans rows [offsets[s], offsets[s+1]).
struct Segments {
  std::vector<std::size_t> offsets = {0};

  std::size_t count() const { return offsets.size() - 1; }
  std::size_t total() const { return offsets.back(); }
  std::size_t begin(std::size_t s) const { return offsets[s]; }
  std::size_t end(std::size_t s) const { return offsets[s + 1]; }
  std::size_t length(std::size_t s) const { return offsets[s + 1] - offsets[s]; }

  void push(std::size_t length) { offsets.push_back(offsets.back() + length); }

  static Segments from_lengths(std::span<const std::size_t> lengths);
};

}  // namespace rcs::tensor
