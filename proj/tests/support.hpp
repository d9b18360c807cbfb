#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "tg/ndnet/gradients.hpp"
#include "tg/ndnet/model.hpp"

namespace tg::testing {

inline std::vector<double> uniform_values(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline nn::Tensor random_tensor(const nn::Shape& shape, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return nn::Tensor(shape, uniform_values(nn::shape_size(shape), rng, lo, hi));
}

inline nn::LabelDistribution random_distribution(std::size_t k, std::mt19937_64& rng) {
  auto v = uniform_values(k, rng, 0.05, 1.0);
  double s = 0.0;
  for (double x : v) s += x;
  for (auto& x : v) x /= s;
  return v;
}

/// Every parameter (weights and biases) drawn uniformly from [-scale, scale].
inline void randomize(nn::Model& m, std::mt19937_64& rng, double scale = 0.5) {
  m.params().assign(uniform_values(m.params().size(), rng, -scale, scale));
}

/// Small models covering every layer kind; `variant` picks the family.
inline nn::Model small_model(int variant, std::mt19937_64& rng, nn::Head head = nn::Head::softmax) {
  std::uniform_int_distribution<int> classes(2, 5);
  const auto k = static_cast<std::size_t>(classes(rng));
  nn::Model m;
  switch (variant % 5) {
    case 0: m = nn::ModelBuilder({6}).dense(5).relu().dense(k).build(head); break;
    case 1: m = nn::ModelBuilder({1, 4, 4}).conv(3).relu().max_pool().dense(k).build(head); break;
    case 2: m = nn::ModelBuilder({2, 5, 5}).conv(3).relu().max_pool().conv(2).relu().dense(4).relu().dense(k).build(head); break;
    case 3: m = nn::ModelBuilder({1, 6, 6}).conv(4).relu().global_avg_pool().dense(k).build(head); break;
    default: m = nn::ModelBuilder({3, 3, 4}).conv(2).relu().dense(6).relu().dense(3).relu().dense(k).build(head); break;
  }
  randomize(m, rng);
  return m;
}

/// Distance of a forward pass from the nearest non-differentiable point: the
/// smallest |ReLU input| and the smallest gap between the two largest positive
/// entries of a max-pool window.
inline double kink_margin(const nn::Model& m, const nn::Tensor& x) {
  const auto trace = nn::forward_trace(m, nn::as_row(x));
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    const nn::Matrix& in = trace.activations[l];
    if (std::holds_alternative<nn::Relu>(m.layers()[l])) {
      margin = std::min(margin, in.cwiseAbs().minCoeff());
    } else if (const auto* pool = std::get_if<nn::MaxPool2>(&m.layers()[l])) {
      const std::size_t h = pool->height, w = pool->width;
      for (std::size_t c = 0; c < pool->channels; ++c) {
        for (std::size_t i = 0; i + 1 < h; i += 2) {
          for (std::size_t j = 0; j + 1 < w; j += 2) {
            std::vector<double> v;
            for (std::size_t a = 0; a < 2; ++a) {
              for (std::size_t b = 0; b < 2; ++b) v.push_back(in(0, static_cast<Eigen::Index>((c * h + i + a) * w + j + b)));
            }
            std::sort(v.rbegin(), v.rend());
            if (v[0] > 0.0) margin = std::min(margin, v[0] - v[1]);
          }
        }
      }
    }
  }
  return margin;
}

/// A random input whose forward pass stays at least `margin` away from every
/// kink, so that finite differences are a valid oracle there.
inline nn::Tensor smooth_input(const nn::Model& m, std::mt19937_64& rng, double margin = 1e-3) {
  for (;;) {
    auto x = random_tensor(m.input_shape(), rng);
    if (kink_margin(m, x) >= margin) return x;
  }
}

/// Elementwise closeness: |a - b| <= rel * (max(|a|, |b|) + floor * max_k |a_k|).
/// The floor keeps coordinates that are tiny compared to the whole vector
/// from dominating the comparison.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-6) {
  double amax = 0.0;
  for (double x : a) amax = std::max(amax, std::abs(x));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max(std::abs(a[i]), std::abs(b[i])) + floor * amax + 1e-300;
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

/// Central differences of a scalar function of a vector.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> at, double h = 1e-5) {
  std::vector<double> g(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double x = at[i];
    at[i] = x + h;
    const double up = f(at);
    at[i] = x - h;
    const double down = f(at);
    at[i] = x;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double sample_loss(const nn::Model& m, const nn::LossFunction& loss, const nn::Tensor& x,
                          const nn::LabelDistribution& y) {
  const nn::Matrix out = nn::outputs(m, nn::as_row(x));
  const nn::Matrix target = Eigen::Map<const nn::Matrix>(y.data(), 1, static_cast<Eigen::Index>(y.size()));
  return nn::loss_values(loss, out, target)(0);
}

}  // namespace tg::testing
