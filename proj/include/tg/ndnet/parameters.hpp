#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tg/ndnet/tensor.hpp"

namespace tg::nn {

/// One trainable layer's slice of the flat parameter array: weights (row-major,
/// `weight_shape`) followed by `bias_size` biases.
struct ParameterSegment {
  std::size_t layer = 0;
  Shape weight_shape;
  std::size_t bias_size = 0;
  std::size_t offset = 0;

  std::size_t weight_size() const { return shape_size(weight_shape); }
  std::size_t size() const { return weight_size() + bias_size; }

  friend bool operator==(const ParameterSegment&, const ParameterSegment&) = default;
};

/// Flat view over all trainable weights of a model, with per-layer segments.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::vector<ParameterSegment> segments);
  ParameterVector(std::vector<ParameterSegment> segments, std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<ParameterSegment>& segments() const noexcept { return segments_; }

  std::span<double> flat() noexcept { return values_; }
  std::span<const double> flat() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<double> segment(std::size_t i);
  std::span<const double> segment(std::size_t i) const;

  /// Replaces all values; the length must equal size().
  void assign(std::span<const double> values);

  ParameterVector zeros_like() const { return ParameterVector(segments_); }

  double dot(const ParameterVector& other) const;
  double norm() const;
  /// this += alpha * other
  void axpy(double alpha, const ParameterVector& other);

  Eigen::Map<Vector> as_eigen() { return {values_.data(), static_cast<Eigen::Index>(values_.size())}; }
  Eigen::Map<const Vector> as_eigen() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<ParameterSegment> segments_;
  std::vector<double> values_;
};

}  // namespace tg::nn
