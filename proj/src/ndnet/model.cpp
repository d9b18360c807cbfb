#include "tg/ndnet/model.hpp"

#include <cmath>
#include <random>

#include "tg/errors.hpp"

namespace tg::nn {

Model::Model(Shape input_shape, std::vector<Layer> layers, Head head)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)), head_(head) {
  if (layers_.empty()) throw ShapeError("model needs at least one layer");
  std::size_t flowing = shape_size(input_shape_);
  std::vector<ParameterSegment> segments;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::size_t expected = shape_size(layer_input_shape(layers_[i]));
    if (expected != flowing) {
      throw ShapeError("layer " + std::to_string(i) + " expects " + std::to_string(expected) + " inputs but receives " +
                       std::to_string(flowing));
    }
    flowing = shape_size(layer_output_shape(layers_[i]));
    const std::size_t count = layer_param_count(layers_[i]);
    if (count == 0) {
      segment_of_layer_.push_back(std::nullopt);
      continue;
    }
    ParameterSegment seg;
    seg.layer = i;
    seg.offset = offset;
    if (const auto* d = std::get_if<Dense>(&layers_[i])) {
      seg.weight_shape = {d->out, d->in};
      seg.bias_size = d->out;
    } else {
      const auto& c = std::get<Conv2d>(layers_[i]);
      seg.weight_shape = {c.out_channels, c.in_channels, 3, 3};
      seg.bias_size = c.out_channels;
    }
    segment_of_layer_.push_back(segments.size());
    segments.push_back(seg);
    offset += count;
  }
  output_size_ = flowing;
  params_ = ParameterVector(std::move(segments));
}

std::optional<std::size_t> Model::param_offset(std::size_t layer) const {
  const auto seg = segment_of_layer_.at(layer);
  if (!seg) return std::nullopt;
  return params_.segments()[*seg].offset;
}

std::span<const double> Model::layer_params(std::size_t layer) const {
  const auto seg = segment_of_layer_.at(layer);
  if (!seg) return {};
  return params_.segment(*seg);
}

void Model::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < params_.segments().size(); ++s) {
    const auto& seg = params_.segments()[s];
    const auto [fan_in, fan_out] = layer_fans(layers_[seg.layer]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto values = params_.segment(s);
    for (std::size_t i = 0; i < seg.weight_size(); ++i) values[i] = dist(rng);
    for (std::size_t i = seg.weight_size(); i < values.size(); ++i) values[i] = 0.0;
  }
}

ModelBuilder::ModelBuilder(Shape input_shape) : input_shape_(input_shape), shape_(std::move(input_shape)) {}

ModelBuilder& ModelBuilder::conv(std::size_t out_channels) {
  if (shape_.size() != 3) throw ShapeError("convolution needs a [C x H x W] input, got " + shape_string(shape_));
  Conv2d c{shape_[0], out_channels, shape_[1], shape_[2]};
  layers_.emplace_back(c);
  shape_ = layer_output_shape(c);
  return *this;
}

ModelBuilder& ModelBuilder::max_pool() {
  if (shape_.size() != 3) throw ShapeError("max-pool needs a [C x H x W] input, got " + shape_string(shape_));
  if (shape_[1] < 2 || shape_[2] < 2) throw ShapeError("max-pool input too small: " + shape_string(shape_));
  MaxPool2 p{shape_[0], shape_[1], shape_[2]};
  layers_.emplace_back(p);
  shape_ = layer_output_shape(p);
  return *this;
}

ModelBuilder& ModelBuilder::relu() {
  layers_.emplace_back(Relu{shape_size(shape_)});
  return *this;
}

ModelBuilder& ModelBuilder::dense(std::size_t out) {
  Dense d{shape_size(shape_), out};
  layers_.emplace_back(d);
  shape_ = {out};
  return *this;
}

ModelBuilder& ModelBuilder::global_avg_pool() {
  if (shape_.size() != 3) throw ShapeError("global average pool needs a [C x H x W] input");
  GlobalAvgPool g{shape_[0], shape_[1], shape_[2]};
  layers_.emplace_back(g);
  shape_ = layer_output_shape(g);
  return *this;
}

Model ModelBuilder::build(Head head) const { return Model(input_shape_, layers_, head); }

ForwardTrace forward_trace(const Model& model, const Matrix& xs) {
  if (static_cast<std::size_t>(xs.cols()) != model.input_size()) {
    throw ShapeError("input has " + std::to_string(xs.cols()) + " values, model expects " +
                     shape_string(model.input_shape()));
  }
  ForwardTrace trace;
  trace.activations.reserve(model.layers().size() + 1);
  trace.activations.push_back(xs);
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    Matrix out;
    layer_forward(model.layers()[i], model.layer_params(i), trace.activations.back(), out);
    trace.activations.push_back(std::move(out));
  }
  return trace;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double shift = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - shift).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

Matrix head_outputs(const Model& model, const Matrix& logits) {
  return model.head() == Head::softmax ? softmax_rows(logits) : logits;
}

Matrix outputs(const Model& model, const Matrix& xs) {
  return head_outputs(model, forward_trace(model, xs).logits());
}

BackwardResult backward(const Model& model, const ForwardTrace& trace, const Matrix& d_logits, bool want_input_grad,
                        ParamGradMode mode) {
  const Eigen::Index batch = trace.activations.front().rows();
  if (batch != d_logits.rows() && batch != 1) throw ShapeError("cotangent batch does not match forward batch");
  if (static_cast<std::size_t>(d_logits.cols()) != model.output_size()) throw ShapeError("cotangent width mismatch");

  BackwardResult result;
  const auto n_params = static_cast<Eigen::Index>(model.params().size());
  if (mode == ParamGradMode::sum) result.param_grads = Matrix::Zero(1, n_params);
  if (mode == ParamGradMode::per_sample) result.param_grads = Matrix::Zero(d_logits.rows(), n_params);

  Matrix upstream = d_logits;
  Matrix downstream;
  const std::size_t n_layers = model.layers().size();
  for (std::size_t i = n_layers; i-- > 0;) {
    ParamGradSink sink;
    if (mode != ParamGradMode::none) {
      if (const auto off = model.param_offset(i)) {
        sink.grads = &result.param_grads;
        sink.offset = *off;
        sink.per_sample = mode == ParamGradMode::per_sample;
      }
    }
    const bool need_down = i > 0 || want_input_grad;
    layer_backward(model.layers()[i], model.layer_params(i), trace.activations[i], upstream,
                   need_down ? &downstream : nullptr, sink);
    if (!need_down) break;
    std::swap(upstream, downstream);
  }
  if (want_input_grad) result.input_grad = std::move(upstream);
  return result;
}

}  // namespace tg::nn
