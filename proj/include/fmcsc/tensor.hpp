#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fmcsc {

// Dense row-major 2-D float array. Parameters and activations are 32-bit;
// reductions accumulate in 64-bit.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, float fill = 0.0f)
      : rows(r), cols(c), data(r * c, fill) {}

  static Tensor from_rows(std::initializer_list<std::initializer_list<float>> rows);

  float& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  float operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::size_t size() const { return rows * cols; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

// C = A * B
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A^T * B
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// C = A * B^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// y += alpha * x (shape-congruent)
void axpy(Tensor& y, float alpha, const Tensor& x);

bool all_finite(const Tensor& t);

// Frobenius norm squared, 64-bit accumulation.
double squared_frobenius(const Tensor& t);

// Row-wise helpers over 1×d slices of batched matrices.
double row_dot(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j);
double row_norm(const Tensor& a, std::size_t i);

// Horizontal concatenation of equal-row-count blocks.
Tensor concat_cols(std::span<const Tensor> blocks);

// Cosine similarity between two 1×d tensors. Throws ShapeError on dimension
// mismatch and ConfigError-family DegenerateInput on a zero-norm vector.
double cosine_similarity(const Tensor& a, const Tensor& b);

}  // namespace fmcsc
