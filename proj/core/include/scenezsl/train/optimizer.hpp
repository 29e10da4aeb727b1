#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenezsl/nn/model.hpp"

namespace scenezsl::train {

class TrainError : public std::runtime_error {
 public:
  enum class Code { kBadConfig, kNonFiniteGradient, kCheckpointWrite, kTraceWrite };
  TrainError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Step-decay schedule: lr0 * factor^floor(epoch / every).
struct LrSchedule {
  double lr0 = 1e-3;
  double factor = 0.5;
  std::size_t every = 20;

  double at(std::size_t epoch) const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments for every parameter, in named() order.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;

  static AdamState for_params(const nn::ModelParams& params);
};

/// One bias-corrected Adam update of a flat parameter block. `step` is the
/// 1-based step index. No NaN check here; see adam_step().
void adam_update(std::span<float> param, std::span<const float> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t step, double lr, const AdamConfig& cfg);

/// Advances the state and updates every tensor. Throws
/// TrainError(kNonFiniteGradient) before touching anything if any gradient
/// is NaN/Inf.
void adam_step(nn::ModelParams& params, const nn::ModelParams& grads, AdamState& state, double lr,
               const AdamConfig& cfg);

}  // namespace scenezsl::train
