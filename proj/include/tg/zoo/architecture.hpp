#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tg/ndnet/model.hpp"

namespace tg::zoo {

enum class LayerKind { conv, fully_connected, global_avg_pool, softmax };

/// One row entry of an architecture table. `width` is channels for conv,
/// units for fully-connected, classes for softmax, unused for pooling.
struct LayerSpec {
  LayerKind kind = LayerKind::fully_connected;
  std::size_t width = 0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ArchitectureSpec {
  char id = '?';
  std::vector<LayerSpec> layers;

  /// Classes of the softmax head.
  std::size_t classes() const;
  std::string describe() const;

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

inline constexpr char kDefenderId = 'D';

/// The ten substitute architectures (ids X, Y, A, F, G, H, I, J, K, L).
const std::map<char, ArchitectureSpec>& catalog();

/// Defender: conv 32, conv 64, conv 128, global average pool, softmax 10.
ArchitectureSpec defender_spec();

/// Looks up a catalog id or the defender id; throws ConfigError otherwise.
ArchitectureSpec find_spec(char id);

/// Throws ConfigError unless the spec ends in softmax and convs precede dense layers.
void validate(const ArchitectureSpec& spec);

/// Instantiates a spec: conv -> 3x3 conv + ReLU + 2x2 max-pool; fully-connected
/// -> dense + ReLU; softmax(K) -> dense to K logits with a softmax head.
/// Glorot-uniform initialization from `seed`. Throws ShapeError when the input
/// shape cannot feed the first layer.
nn::Model build(const ArchitectureSpec& spec, const nn::Shape& input_shape, std::uint64_t seed);

}  // namespace tg::zoo
