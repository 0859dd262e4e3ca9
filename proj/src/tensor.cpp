#include "fmcsc/tensor.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fmcsc/errors.hpp"

namespace fmcsc {

namespace {

using EMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<const EMat>;
using MutMap = Eigen::Map<EMat>;

Map as_eigen(const Tensor& t) {
  return Map(t.data.data(), static_cast<Eigen::Index>(t.rows),
             static_cast<Eigen::Index>(t.cols));
}

}  // namespace

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
  Tensor t(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != t.cols) throw ShapeError("from_rows: ragged row lengths");
    std::size_t j = 0;
    for (float v : row) t(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
  Tensor c(a.rows, b.cols);
  MutMap(c.data.data(), c.rows, c.cols) = as_eigen(a) * as_eigen(b);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows != b.rows) throw ShapeError("matmul_tn: row counts differ");
  Tensor c(a.cols, b.cols);
  MutMap(c.data.data(), c.rows, c.cols) = as_eigen(a).transpose() * as_eigen(b);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols != b.cols) throw ShapeError("matmul_nt: column counts differ");
  Tensor c(a.rows, b.rows);
  MutMap(c.data.data(), c.rows, c.cols) = as_eigen(a) * as_eigen(b).transpose();
  return c;
}

void axpy(Tensor& y, float alpha, const Tensor& x) {
  if (!y.same_shape(x)) throw ShapeError("axpy: shape mismatch");
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

bool all_finite(const Tensor& t) {
  for (float v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

double squared_frobenius(const Tensor& t) {
  double acc = 0.0;
  for (float v : t.data) acc += static_cast<double>(v) * v;
  return acc;
}

double row_dot(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  if (a.cols != b.cols) throw ShapeError("row_dot: dimension mismatch");
  double acc = 0.0;
  const float* pa = a.data.data() + i * a.cols;
  const float* pb = b.data.data() + j * b.cols;
  for (std::size_t k = 0; k < a.cols; ++k) acc += static_cast<double>(pa[k]) * pb[k];
  return acc;
}

double row_norm(const Tensor& a, std::size_t i) {
  return std::sqrt(row_dot(a, i, a, i));
}

Tensor concat_cols(std::span<const Tensor> blocks) {
  if (blocks.empty()) return {};
  std::size_t rows = blocks.front().rows;
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows != rows) throw ShapeError("concat_cols: row counts differ");
    cols += b.cols;
  }
  Tensor out(rows, cols);
  std::size_t off = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < b.cols; ++j) out(i, off + j) = b(i, j);
    off += b.cols;
  }
  return out;
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.rows != 1 || b.rows != 1 || a.cols != b.cols)
    throw ShapeError("cosine_similarity: expects two 1×d tensors of equal d");
  double na = row_norm(a, 0);
  double nb = row_norm(b, 0);
  if (na == 0.0 || nb == 0.0)
    throw ConfigError("cosine_similarity: degenerate zero-norm input");
  return row_dot(a, 0, b, 0) / (na * nb);
}

}  // namespace fmcsc
