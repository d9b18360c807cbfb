#include "tg/dataio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tg/errors.hpp"

namespace tg::data {
namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<int>& labels, std::size_t classes) {
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw ConfigError("label " + std::to_string(l) + " outside [0, " + std::to_string(classes) + ")");
    }
    by_class[static_cast<std::size_t>(l)].push_back(i);
  }
  return by_class;
}

// Splits `n` items into parts proportional to `fractions` by largest remainder;
// ties go to the earlier part.
std::vector<std::size_t> apportion(std::size_t n, std::span<const double> fractions) {
  std::vector<std::size_t> counts(fractions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < fractions.size(); ++j) {
    const double exact = fractions[j] * static_cast<double>(n);
    counts[j] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[j];
    remainders.emplace_back(exact - std::floor(exact), j);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

}  // namespace

nn::Tensor Dataset::input(std::size_t i) const {
  return nn::row_tensor(inputs, static_cast<Eigen::Index>(i), sample_shape);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.name = name;
  out.sample_shape = sample_shape;
  out.classes = classes;
  out.inputs.resize(static_cast<Eigen::Index>(indices.size()), inputs.cols());
  out.labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.inputs.row(static_cast<Eigen::Index>(k)) = inputs.row(static_cast<Eigen::Index>(indices[k]));
    out.labels.push_back(labels.at(indices[k]));
  }
  return out;
}

void Dataset::validate(bool unit_range) const {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size()) {
    throw ShapeError("dataset " + name + ": " + std::to_string(inputs.rows()) + " inputs but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (static_cast<std::size_t>(inputs.cols()) != nn::shape_size(sample_shape)) {
    throw ShapeError("dataset " + name + ": rows do not match sample shape " + nn::shape_string(sample_shape));
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw ConfigError("dataset " + name + ": label " + std::to_string(l) + " outside [0, " + std::to_string(classes) +
                        ")");
    }
  }
  if (!inputs.allFinite()) throw ConfigError("dataset " + name + ": non-finite input values");
  if (unit_range && inputs.size() > 0 && (inputs.minCoeff() < 0.0 || inputs.maxCoeff() > 1.0)) {
    throw ConfigError("dataset " + name + ": pixel values outside [0, 1]");
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(classes, 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

std::vector<Dataset> split(const Dataset& ds, std::span<const double> fractions, std::uint64_t seed) {
  if (fractions.empty()) throw ConfigError("split needs at least one fraction");
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("split fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions sum to " + std::to_string(total) + ", not 1");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> parts(fractions.size());
  for (auto& members : indices_by_class(ds.labels, ds.classes)) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto counts = apportion(members.size(), fractions);
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      parts[j].insert(parts[j].end(), members.begin() + static_cast<std::ptrdiff_t>(cursor),
                      members.begin() + static_cast<std::ptrdiff_t>(cursor + counts[j]));
      cursor += counts[j];
    }
  }
  std::vector<Dataset> out;
  for (auto& p : parts) {
    std::sort(p.begin(), p.end());
    out.push_back(ds.subset(p));
  }
  return out;
}

Dataset stratified_subset(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) throw ConfigError("subset fraction must be in (0, 1]");
  if (fraction == 1.0) return ds;
  const double fr[2] = {fraction, 1.0 - fraction};
  return split(ds, fr, seed).front();
}

std::vector<std::size_t> stratified_pick(const std::vector<int>& labels, std::size_t classes, std::size_t total,
                                         std::uint64_t seed) {
  if (classes == 0) throw ConfigError("stratified pick needs at least one class");
  std::mt19937_64 rng(seed);
  auto by_class = indices_by_class(labels, classes);
  std::vector<std::size_t> picked;
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t want = total / classes + (c < total % classes ? 1 : 0);
    auto& members = by_class[c];
    if (members.size() < want) {
      throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(members.size()) + " samples, need " +
                        std::to_string(want));
    }
    std::shuffle(members.begin(), members.end(), rng);
    picked.insert(picked.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace tg::data
