#pragma once

#include "fmcsc/rng.hpp"
#include "fmcsc/tensor.hpp"

namespace fmcsc {

struct ClusterAssignment {
  std::vector<std::uint32_t> labels;  // N entries in [0, K)
  Tensor centers;                     // K × d
  double inertia = 0.0;
};

struct KmeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iters = 300;
  double tol = 1e-6;  // relative inertia change
  // When set, receives one per-iteration inertia sequence per restart.
  std::vector<std::vector<double>>* inertia_trace = nullptr;
};

// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs by
// inertia, ties broken by lowest restart index. Empty clusters are re-seeded
// from the point farthest from its center.
ClusterAssignment kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                         const KmeansOptions& opts = {});

// Fraction of samples matched under the best cluster-to-class bijection
// (Hungarian assignment on the contingency matrix).
double clustering_accuracy(std::span<const std::uint32_t> pred,
                           std::span<const std::uint32_t> truth);

// Mutual information normalized by the arithmetic mean of the entropies;
// 0/0 is defined as 0.
double nmi(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth);

// Adjusted Rand index via pair counting.
double ari(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth);

// First two principal components of the (centered) rows; N × 2 output.
Tensor pca_embed_2d(const Tensor& points);

}  // namespace fmcsc
