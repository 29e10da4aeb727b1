#include "scenezsl/train/optimizer.hpp"

#include <cmath>

namespace scenezsl::train {

TrainError::TrainError(Code code, const std::string& detail) : std::runtime_error(detail), code_(code) {}

double LrSchedule::at(std::size_t epoch) const {
  const std::size_t drops = every == 0 ? 0 : epoch / every;
  return lr0 * std::pow(factor, static_cast<double>(drops));
}

AdamState AdamState::for_params(const nn::ModelParams& params) {
  AdamState state;
  for (const auto& [name, tensor] : params.named()) {
    state.m.emplace_back(tensor->size(), 0.0);
    state.v.emplace_back(tensor->size(), 0.0);
  }
  return state;
}

void adam_update(std::span<float> param, std::span<const float> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t step, double lr, const AdamConfig& cfg) {
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < param.size(); ++k) {
    const double g = grad[k];
    m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
    v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[k] / c1;
    const double v_hat = v[k] / c2;
    param[k] = static_cast<float>(param[k] - lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

void adam_step(nn::ModelParams& params, const nn::ModelParams& grads, AdamState& state, double lr,
               const AdamConfig& cfg) {
  auto targets = params.named();
  const auto sources = grads.named();
  if (targets.size() != sources.size() || targets.size() != state.m.size()) {
    throw TrainError(TrainError::Code::kBadConfig, "optimizer state does not match the parameters");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].second->shape() != targets[i].second->shape()) {
      throw TrainError(TrainError::Code::kBadConfig, "gradient shape mismatch for " + targets[i].first);
    }
    if (!sources[i].second->all_finite()) {
      throw TrainError(TrainError::Code::kNonFiniteGradient, "non-finite gradient in " + sources[i].first);
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    adam_update(targets[i].second->data(), sources[i].second->data(), state.m[i], state.v[i], state.step, lr,
                cfg);
  }
}

}  // namespace scenezsl::train
