#pragma once

#include <cmath>
#include <functional>

#include "fmcsc/mlp.hpp"

namespace testutil {

// Central finite difference of a scalar function with respect to one entry of
// a tensor owned elsewhere. Uses the step actually realized in float storage.
inline double central_diff(const std::function<double()>& f, float& x, double h) {
  float saved = x;
  x = static_cast<float>(saved + h);
  double hi = f();
  double hi_x = x;
  x = static_cast<float>(saved - h);
  double lo = f();
  double lo_x = x;
  x = saved;
  return (hi - lo) / (hi_x - lo_x);
}

inline double rel_err(double a, double b) {
  double denom = std::max({std::fabs(a), std::fabs(b), 1e-8});
  return std::fabs(a - b) / denom;
}

// Independent plain-loop forward pass used as an oracle against mlp_forward.
inline fmcsc::Tensor naive_forward(const fmcsc::MlpParams& p, const fmcsc::Tensor& in) {
  fmcsc::Tensor x = in;
  for (const auto& layer : p.layers) {
    fmcsc::Tensor y(x.rows, layer.weight.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = 0; j < layer.weight.cols; ++j) {
        double acc = layer.bias(0, j);
        for (std::size_t k = 0; k < x.cols; ++k)
          acc += static_cast<double>(x(i, k)) * static_cast<double>(layer.weight(k, j));
        float v = static_cast<float>(acc);
        if (layer.act == fmcsc::Activation::kRelu && v < 0.0f) v = 0.0f;
        y(i, j) = v;
      }
    x = std::move(y);
  }
  return x;
}

// Same forward pass carried out entirely in doubles; gives finite differences
// enough precision to resolve an h = 1e-5 step.
inline double double_forward_half_sq(const fmcsc::MlpParams& p, const fmcsc::Tensor& in) {
  std::vector<double> x(in.data.begin(), in.data.end());
  std::size_t rows = in.rows, cols = in.cols;
  for (const auto& layer : p.layers) {
    std::size_t out_cols = layer.weight.cols;
    std::vector<double> y(rows * out_cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < out_cols; ++j) {
        double acc = layer.bias(0, j);
        for (std::size_t k = 0; k < cols; ++k)
          acc += x[i * cols + k] * static_cast<double>(layer.weight(k, j));
        if (layer.act == fmcsc::Activation::kRelu && acc < 0.0) acc = 0.0;
        y[i * out_cols + j] = acc;
      }
    x = std::move(y);
    cols = out_cols;
  }
  double loss = 0.0;
  for (double v : x) loss += v * v;
  return 0.5 * loss;
}

}  // namespace testutil
