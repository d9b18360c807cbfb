#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tg/ndnet/tensor.hpp"

namespace tg::data {

/// Labeled samples stored as one row per sample.
struct Dataset {
  std::string name;
  nn::Shape sample_shape;
  nn::Matrix inputs;  ///< N x prod(sample_shape)
  std::vector<int> labels;
  std::size_t classes = 10;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  nn::Tensor input(std::size_t i) const;

  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Throws ShapeError / ConfigError when the invariants do not hold.
  /// `unit_range` additionally requires every value to lie in [0, 1].
  void validate(bool unit_range = true) const;

  std::vector<std::size_t> class_counts() const;
};

/// Disjoint, exhaustive, label-stratified partition. `fractions` must sum to 1
/// (within 1e-9). Per-class allocation uses largest remainders, so each part
/// holds within one item of fraction * class count for every class.
std::vector<Dataset> split(const Dataset& ds, std::span<const double> fractions, std::uint64_t seed);

/// Label-stratified random subset holding `fraction` of the samples.
Dataset stratified_subset(const Dataset& ds, double fraction, std::uint64_t seed);

/// `per_class` samples of each class, drawn deterministically from `seed`.
/// Throws ConfigError when some class has fewer samples.
std::vector<std::size_t> stratified_pick(const std::vector<int>& labels, std::size_t classes, std::size_t total,
                                         std::uint64_t seed);

}  // namespace tg::data
