#include "fmcsc/adam.hpp"

#include <cmath>

#include "fmcsc/errors.hpp"

namespace fmcsc {

AdamState make_adam_state(const MlpParams& params, AdamConfig cfg) {
  AdamState s;
  s.cfg = cfg;
  for (const Tensor* t : parameter_tensors(params)) {
    s.first_moment.emplace_back(t->rows, t->cols);
    s.second_moment.emplace_back(t->rows, t->cols);
  }
  return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads,
               double learning_rate) {
  if (learning_rate <= 0.0) throw ConfigError("adam_step: learning_rate must be > 0");
  auto ps = parameter_tensors(params);
  auto gs = gradient_tensors(grads);
  if (ps.size() != gs.size() || ps.size() != state.first_moment.size())
    throw ShapeError("adam_step: state/params/grads not congruent");

  state.step += 1;
  double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
  double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  for (std::size_t t = 0; t < ps.size(); ++t) {
    Tensor& p = *ps[t];
    const Tensor& g = *gs[t];
    Tensor& m = state.first_moment[t];
    Tensor& v = state.second_moment[t];
    if (!p.same_shape(g) || !p.same_shape(m))
      throw ShapeError("adam_step: tensor shape mismatch");
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      double gi = g.data[i];
      double mi = b1 * m.data[i] + (1.0 - b1) * gi;
      double vi = b2 * v.data[i] + (1.0 - b2) * gi * gi;
      m.data[i] = static_cast<float>(mi);
      v.data[i] = static_cast<float>(vi);
      double mhat = mi / bc1;
      double vhat = vi / bc2;
      p.data[i] = static_cast<float>(p.data[i] -
                                     learning_rate * mhat / (std::sqrt(vhat) + state.cfg.epsilon));
    }
  }
}

}  // namespace fmcsc
