#include "tg/theftsim/oracle.hpp"

#include "tg/errors.hpp"
#include "tg/ndnet/gradients.hpp"

namespace tg::theft {

Oracle::Oracle(std::shared_ptr<const nn::Model> model, std::optional<defense::OutputPerturbationConfig> defense)
    : model_(std::move(model)), defense_(std::move(defense)) {
  if (!model_) throw ConfigError("oracle needs a model");
  if (defense_) defense_->validate();
}

nn::Matrix Oracle::query(const nn::Matrix& xs) const {
  if (static_cast<std::size_t>(xs.cols()) != model_->input_size()) {
    throw ShapeError("oracle query rows have " + std::to_string(xs.cols()) + " values, model expects " +
                     nn::shape_string(model_->input_shape()));
  }
  nn::Matrix out = nn::outputs_chunked(*model_, xs);
  if (defense_) {
    for (Eigen::Index r = 0; r < xs.rows(); ++r) {
      const nn::Tensor x = nn::row_tensor(xs, r, model_->input_shape());
      const auto y = defense::counter_attack(*model_, loss_, x, nn::to_distribution(out, r), *defense_);
      std::copy(y.begin(), y.end(), out.row(r).data());
    }
  }
  queries_.fetch_add(static_cast<std::uint64_t>(xs.rows()));
  return out;
}

}  // namespace tg::theft
