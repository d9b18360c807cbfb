#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tg/ndnet/layers.hpp"
#include "tg/ndnet/parameters.hpp"
#include "tg/ndnet/tensor.hpp"

namespace tg::nn {

/// How the final layer's outputs are turned into the model output.
enum class Head { softmax, identity };

/// Parameterized classifier: a validated layer stack plus its flat parameters.
class Model {
 public:
  Model() = default;
  /// Validates the chain of layer shapes; parameters start at zero.
  Model(Shape input_shape, std::vector<Layer> layers, Head head = Head::softmax);

  const Shape& input_shape() const noexcept { return input_shape_; }
  std::size_t input_size() const noexcept { return shape_size(input_shape_); }
  std::size_t output_size() const noexcept { return output_size_; }
  Head head() const noexcept { return head_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  ParameterVector& params() noexcept { return params_; }
  const ParameterVector& params() const noexcept { return params_; }

  /// Offset of layer `i`'s parameters in the flat array, if it has any.
  std::optional<std::size_t> param_offset(std::size_t layer) const;
  std::span<const double> layer_params(std::size_t layer) const;

  /// Uniform Glorot initialization, biases zero; deterministic in `seed`.
  void initialize(std::uint64_t seed);

  /// Architecture identifier (zoo id), '?' for ad-hoc models.
  char arch_id() const noexcept { return arch_id_; }
  void set_arch_id(char id) noexcept { arch_id_ = id; }

 private:
  Shape input_shape_;
  std::vector<Layer> layers_;
  Head head_ = Head::softmax;
  std::size_t output_size_ = 0;
  std::vector<std::optional<std::size_t>> segment_of_layer_;
  ParameterVector params_;
  char arch_id_ = '?';
};

/// Incremental construction of layer stacks with automatic shape tracking.
class ModelBuilder {
 public:
  explicit ModelBuilder(Shape input_shape);

  ModelBuilder& conv(std::size_t out_channels);
  ModelBuilder& max_pool();
  ModelBuilder& relu();
  ModelBuilder& dense(std::size_t out);
  ModelBuilder& global_avg_pool();

  const Shape& current_shape() const noexcept { return shape_; }
  Model build(Head head = Head::softmax) const;

 private:
  Shape input_shape_;
  Shape shape_;
  std::vector<Layer> layers_;
};

/// Activations of a batched forward pass: [0] is the input, [i + 1] the output of layer i.
struct ForwardTrace {
  std::vector<Matrix> activations;
  const Matrix& logits() const { return activations.back(); }
};

ForwardTrace forward_trace(const Model& model, const Matrix& xs);

/// Row-wise softmax, max-shifted.
Matrix softmax_rows(const Matrix& logits);

/// Model outputs for a batch (softmax probabilities, or raw values for identity heads).
Matrix outputs(const Model& model, const Matrix& xs);
Matrix head_outputs(const Model& model, const Matrix& logits);

enum class ParamGradMode { none, sum, per_sample };

struct BackwardResult {
  Matrix input_grad;   ///< one row per cotangent row (empty if not requested)
  Matrix param_grads;  ///< 1 row (sum) or one row per cotangent (per_sample)
};

/// Reverse pass from logit cotangents. `d_logits` has either as many rows as the
/// trace batch, or any number of rows when the trace holds a single input.
BackwardResult backward(const Model& model, const ForwardTrace& trace, const Matrix& d_logits, bool want_input_grad,
                        ParamGradMode mode);

}  // namespace tg::nn
