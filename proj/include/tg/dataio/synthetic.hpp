#pragma once

#include <cstdint>

#include "tg/dataio/dataset.hpp"

namespace tg::data {

/// Isotropic unit-variance Gaussian blobs in R^dim, one per class.
///
/// With dim >= classes the means sit at (separation / sqrt 2) * e_c, so every
/// pair of means is exactly `separation` apart. With fewer dimensions the means
/// lie on the first axis at c * separation (neighbouring classes `separation`
/// apart). Values are not confined to [0, 1].
Dataset synthetic(std::size_t classes, std::size_t dim, std::size_t per_class, double separation, std::uint64_t seed);

}  // namespace tg::data
