#pragma once

#include <cstdint>

#include "fmcsc/mlp.hpp"

namespace fmcsc {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;   // congruent with parameter_tensors order
  std::vector<Tensor> second_moment;
  AdamConfig cfg;
};

AdamState make_adam_state(const MlpParams& params, AdamConfig cfg = {});

// Standard bias-corrected Adam update, in place. learning_rate > 0.
void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads,
               double learning_rate);

}  // namespace fmcsc
