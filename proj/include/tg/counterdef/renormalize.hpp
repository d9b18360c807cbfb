#pragma once

#include "tg/ndnet/tensor.hpp"

namespace tg::defense {

/// Alternates centering the perturbation y_star - y to zero mean and clipping the
/// result to [0, 1], `rounds` times.
nn::LabelDistribution renorm_centering(const nn::LabelDistribution& y, const nn::LabelDistribution& y_star, int rounds);

/// Clips to [0, 1], then gives missing mass to the smallest entry or removes
/// excess mass from the largest entry (moving on to the next-largest while an
/// entry would go negative). Ties resolve to the lowest index. The left-to-right
/// sum of the result is 1 within one unit in the last place.
nn::LabelDistribution renorm_winner_takes_all(const nn::LabelDistribution& y_star);

/// Left-to-right sum, the reference used by the normalization contracts.
double mass(const nn::LabelDistribution& y);

}  // namespace tg::defense
