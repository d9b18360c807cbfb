#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>

#include "tg/counterdef/counter_attack.hpp"
#include "tg/ndnet/model.hpp"

namespace tg::theft {

/// The black box under attack: answers label-distribution queries, optionally
/// through the counter-attack defense, and counts every queried sample.
/// Queries are safe to issue concurrently; the model is never modified.
class Oracle {
 public:
  explicit Oracle(std::shared_ptr<const nn::Model> model,
                  std::optional<defense::OutputPerturbationConfig> defense = std::nullopt);

  Oracle(const Oracle&) = delete;
  Oracle& operator=(const Oracle&) = delete;

  /// One output row per input row. Increments the query count by xs.rows().
  nn::Matrix query(const nn::Matrix& xs) const;

  std::uint64_t query_count() const noexcept { return queries_.load(); }
  const nn::Model& model() const noexcept { return *model_; }
  const std::optional<defense::OutputPerturbationConfig>& defense() const noexcept { return defense_; }

 private:
  std::shared_ptr<const nn::Model> model_;
  std::optional<defense::OutputPerturbationConfig> defense_;
  nn::LossFunction loss_ = nn::LossFunction::cross_entropy();
  mutable std::atomic<std::uint64_t> queries_{0};
};

}  // namespace tg::theft
