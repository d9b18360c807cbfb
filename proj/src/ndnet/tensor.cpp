#include "tg/ndnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tg/errors.hpp"

namespace tg::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " values");
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix as_row(const Tensor& t) {
  Matrix m(1, static_cast<Eigen::Index>(t.size()));
  std::copy(t.data().begin(), t.data().end(), m.data());
  return m;
}

Tensor row_tensor(const Matrix& m, Eigen::Index r, const Shape& shape) {
  std::vector<double> data(m.row(r).data(), m.row(r).data() + m.cols());
  return Tensor(shape, std::move(data));
}

LabelDistribution to_distribution(const Matrix& m, Eigen::Index r) {
  return LabelDistribution(m.row(r).data(), m.row(r).data() + m.cols());
}

Matrix distributions_to_matrix(const std::vector<LabelDistribution>& ys) {
  if (ys.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(ys.size()), static_cast<Eigen::Index>(ys.front().size()));
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i].size() != ys.front().size()) throw ShapeError("label distributions differ in length");
    std::copy(ys[i].begin(), ys[i].end(), m.row(static_cast<Eigen::Index>(i)).data());
  }
  return m;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

LabelDistribution one_hot(std::size_t k, std::size_t classes) {
  LabelDistribution y(classes, 0.0);
  y.at(k) = 1.0;
  return y;
}

Matrix one_hot_rows(const std::vector<int>& labels, std::size_t classes) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw ShapeError("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
    }
    m(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return m;
}

}  // namespace tg::nn
