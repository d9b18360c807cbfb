#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tg::nn {

using Shape = std::vector<std::size_t>;

/// Row-major dynamic matrix. Batches are stored one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Class scores emitted by a model (softmax output unless the head is identity).
using LabelDistribution = std::vector<double>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float64 tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Copies a tensor into a 1-row matrix.
Matrix as_row(const Tensor& t);
/// Copies row `r` of `m` into a tensor of the given shape.
Tensor row_tensor(const Matrix& m, Eigen::Index r, const Shape& shape);

LabelDistribution to_distribution(const Matrix& m, Eigen::Index r);
Matrix distributions_to_matrix(const std::vector<LabelDistribution>& ys);

std::size_t argmax(std::span<const double> values);
LabelDistribution one_hot(std::size_t k, std::size_t classes);
/// One one-hot row per label.
Matrix one_hot_rows(const std::vector<int>& labels, std::size_t classes);

}  // namespace tg::nn
