#include "tg/counterdef/renormalize.hpp"

#include <algorithm>
#include <numeric>

#include "tg/errors.hpp"

namespace tg::defense {
namespace {

std::size_t lowest_index_min(const nn::LabelDistribution& y) {
  return static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
}

std::size_t lowest_index_max(const nn::LabelDistribution& y) {
  return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

}  // namespace

double mass(const nn::LabelDistribution& y) { return std::accumulate(y.begin(), y.end(), 0.0); }

nn::LabelDistribution renorm_centering(const nn::LabelDistribution& y, const nn::LabelDistribution& y_star,
                                       int rounds) {
  if (rounds < 1) throw ConfigError("centering needs at least one round");
  if (y.size() != y_star.size()) throw ShapeError("centering: distributions differ in length");
  if (y.empty()) return y_star;
  nn::LabelDistribution out = y_star;
  nn::LabelDistribution delta(y.size());
  for (int r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] = out[i] - y[i];
    const double mean = std::accumulate(delta.begin(), delta.end(), 0.0) / static_cast<double>(delta.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::clamp(y[i] + (delta[i] - mean), 0.0, 1.0);
  }
  return out;
}

nn::LabelDistribution renorm_winner_takes_all(const nn::LabelDistribution& y_star) {
  if (y_star.empty()) throw ShapeError("winner-takes-all needs a non-empty distribution");
  nn::LabelDistribution out(y_star.size());
  std::transform(y_star.begin(), y_star.end(), out.begin(), [](double v) { return std::clamp(v, 0.0, 1.0); });

  const double total = mass(out);
  if (total < 1.0) {
    out[lowest_index_min(out)] += 1.0 - total;
  } else if (total > 1.0) {
    double excess = total - 1.0;
    std::vector<bool> drained(out.size(), false);
    while (excess > 0.0) {
      std::size_t best = out.size();
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (!drained[i] && (best == out.size() || out[i] > out[best])) best = i;
      }
      if (best == out.size()) break;
      const double take = std::min(excess, out[best]);
      out[best] -= take;
      excess -= take;
      drained[best] = true;
    }
  }

  // Absorb the rounding left over by the floating-point additions above.
  for (int pass = 0; pass < 4; ++pass) {
    const double s = mass(out);
    if (s == 1.0) break;
    if (s < 1.0) {
      const std::size_t i = lowest_index_min(out);
      out[i] = std::min(1.0, out[i] + (1.0 - s));
    } else {
      const std::size_t i = lowest_index_max(out);
      out[i] = std::max(0.0, out[i] - (s - 1.0));
    }
  }
  return out;
}

}  // namespace tg::defense
