#include "tg/dataio/synthetic.hpp"

#include <cmath>
#include <random>

#include "tg/errors.hpp"

namespace tg::data {

Dataset synthetic(std::size_t classes, std::size_t dim, std::size_t per_class, double separation, std::uint64_t seed) {
  if (classes == 0 || dim == 0 || per_class == 0) throw ConfigError("synthetic dataset counts must be positive");
  if (!(separation >= 0.0)) throw ConfigError("separation must be non-negative");

  nn::Matrix means = nn::Matrix::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < classes; ++c) {
    if (dim >= classes) {
      means(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) = separation / std::sqrt(2.0);
    } else {
      means(static_cast<Eigen::Index>(c), 0) = static_cast<double>(c) * separation;
    }
  }

  Dataset ds;
  ds.name = "synthetic";
  ds.sample_shape = {dim};
  ds.classes = classes;
  ds.inputs.resize(static_cast<Eigen::Index>(classes * per_class), static_cast<Eigen::Index>(dim));
  ds.labels.reserve(classes * per_class);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::Index row = 0;
  for (std::size_t n = 0; n < per_class; ++n) {
    for (std::size_t c = 0; c < classes; ++c, ++row) {
      for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(dim); ++d) {
        ds.inputs(row, d) = means(static_cast<Eigen::Index>(c), d) + noise(rng);
      }
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  return ds;
}

}  // namespace tg::data
