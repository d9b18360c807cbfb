#include "tg/zoo/architecture.hpp"

#include "tg/errors.hpp"

namespace tg::zoo {
namespace {

LayerSpec conv(std::size_t w) { return {LayerKind::conv, w}; }
LayerSpec fc(std::size_t w) { return {LayerKind::fully_connected, w}; }
LayerSpec softmax(std::size_t k) { return {LayerKind::softmax, k}; }

std::map<char, ArchitectureSpec> make_catalog() {
  const std::vector<ArchitectureSpec> rows = {
      {'X', {conv(64), conv(128), softmax(10)}},
      {'Y', {conv(64), conv(128), conv(128), softmax(10)}},
      {'A', {conv(32), conv(64), fc(200), fc(200), softmax(10)}},
      {'F', {conv(32), conv(64), fc(200), softmax(10)}},
      {'G', {conv(32), conv(64), softmax(10)}},
      {'H', {conv(32), fc(200), fc(200), softmax(10)}},
      {'I', {fc(200), fc(200), fc(200), softmax(10)}},
      {'J', {fc(1000), fc(200), softmax(10)}},
      {'K', {fc(1000), fc(500), fc(200), softmax(10)}},
      {'L', {conv(32), fc(1000), fc(200), softmax(10)}},
  };
  std::map<char, ArchitectureSpec> out;
  for (const auto& r : rows) out.emplace(r.id, r);
  return out;
}

}  // namespace

std::size_t ArchitectureSpec::classes() const {
  if (layers.empty() || layers.back().kind != LayerKind::softmax) throw ConfigError("architecture has no softmax head");
  return layers.back().width;
}

std::string ArchitectureSpec::describe() const {
  std::string out(1, id);
  out += ":";
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::conv: out += " conv" + std::to_string(l.width); break;
      case LayerKind::fully_connected: out += " fc" + std::to_string(l.width); break;
      case LayerKind::global_avg_pool: out += " gap"; break;
      case LayerKind::softmax: out += " softmax" + std::to_string(l.width); break;
    }
  }
  return out;
}

const std::map<char, ArchitectureSpec>& catalog() {
  static const auto table = make_catalog();
  return table;
}

ArchitectureSpec defender_spec() {
  return {kDefenderId, {conv(32), conv(64), conv(128), {LayerKind::global_avg_pool, 0}, softmax(10)}};
}

ArchitectureSpec find_spec(char id) {
  if (id == kDefenderId) return defender_spec();
  const auto it = catalog().find(id);
  if (it == catalog().end()) throw ConfigError(std::string("unknown architecture id '") + id + "'");
  return it->second;
}

void validate(const ArchitectureSpec& spec) {
  if (spec.layers.empty() || spec.layers.back().kind != LayerKind::softmax) {
    throw ConfigError("architecture " + spec.describe() + " must end in a softmax layer");
  }
  bool seen_dense = false;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (l.kind == LayerKind::softmax && i + 1 != spec.layers.size()) {
      throw ConfigError("softmax must be the last layer of " + spec.describe());
    }
    if (l.kind == LayerKind::fully_connected) seen_dense = true;
    if ((l.kind == LayerKind::conv || l.kind == LayerKind::global_avg_pool) && seen_dense) {
      throw ConfigError("convolutional layers must precede fully-connected layers in " + spec.describe());
    }
    if (l.kind != LayerKind::global_avg_pool && l.width == 0) {
      throw ConfigError("zero-width layer in " + spec.describe());
    }
  }
}

nn::Model build(const ArchitectureSpec& spec, const nn::Shape& input_shape, std::uint64_t seed) {
  validate(spec);
  nn::ModelBuilder b(input_shape);
  for (const auto& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::conv: b.conv(l.width).relu().max_pool(); break;
      case LayerKind::fully_connected: b.dense(l.width).relu(); break;
      case LayerKind::global_avg_pool: b.global_avg_pool(); break;
      case LayerKind::softmax: b.dense(l.width); break;
    }
  }
  nn::Model model = b.build(nn::Head::softmax);
  model.set_arch_id(spec.id);
  model.initialize(seed);
  return model;
}

}  // namespace tg::zoo
