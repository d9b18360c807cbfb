#pragma once

#include <cstddef>
#include <span>
#include <variant>

#include "tg/ndnet/tensor.hpp"

namespace tg::nn {

/// Fully connected layer. Parameters: weights [out x in] then bias [out].
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
};

/// 3x3 convolution, stride 1, zero "same" padding, over a [C x H x W] input.
/// Parameters: weights [out_channels x in_channels*9] then bias [out_channels].
struct Conv2d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// 2x2 max-pool, stride 2, floor semantics for odd sizes.
struct MaxPool2 {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

struct Relu {
  std::size_t size = 0;
};

/// Mean over the spatial positions of each channel.
struct GlobalAvgPool {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

using Layer = std::variant<Dense, Conv2d, MaxPool2, Relu, GlobalAvgPool>;

Shape layer_input_shape(const Layer& layer);
Shape layer_output_shape(const Layer& layer);
std::size_t layer_param_count(const Layer& layer);
/// Fan-in and fan-out used for uniform Glorot initialization (0/0 for untrainable layers).
std::pair<std::size_t, std::size_t> layer_fans(const Layer& layer);

/// Destination for parameter gradients of one layer. `grads` holds one row per
/// cotangent when `per_sample` is set, otherwise a single accumulated row;
/// `offset` locates the layer's segment inside a row.
struct ParamGradSink {
  Matrix* grads = nullptr;
  std::size_t offset = 0;
  bool per_sample = false;

  double* row(Eigen::Index b) const { return grads->row(per_sample ? b : 0).data() + offset; }
};

/// Batched forward: one sample per row of `in`.
void layer_forward(const Layer& layer, std::span<const double> params, const Matrix& in, Matrix& out);

/// Batched backward. `in` holds either the same number of rows as `d_out` or a
/// single row shared by every cotangent row (used to backprop several output
/// directions through one input). `d_in` may be null; `sink.grads` may be null.
void layer_backward(const Layer& layer, std::span<const double> params, const Matrix& in, const Matrix& d_out,
                    Matrix* d_in, const ParamGradSink& sink);

}  // namespace tg::nn
