#include "rcsearch/tensor/matrix.hpp"

#include "rcsearch/error.hpp"

namespace rcs::tensor {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : shape_{rows, cols}, data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch, "data length " + std::to_string(data_.size()) + " vs shape " +
                                               shape_.to_string());
  }
}

Matrix &Matrix::operator+=(const Matrix &other) {
  if (other.shape_ != shape_) {
    throw Error(ErrorCode::kShapeMismatch, shape_.to_string() + " += " + other.shape_.to_string());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Segments Segments::from_lengths(std::span<const std::size_t> lengths) {
  Segments s;
  s.offsets.reserve(lengths.size() + 1);
  for (std::size_t len : lengths) s.push(len);
  return s;
}

}  // namespace rcs::tensor
