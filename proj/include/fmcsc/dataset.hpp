#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fmcsc/rng.hpp"
#include "fmcsc/tensor.hpp"

namespace fmcsc {

// Aligned multi-view data: row i of every view is sample i. Labels exist for
// evaluation only; training code never sees them.
struct MultiViewDataset {
  std::vector<Tensor> views;         // V tensors, each N × D_v
  std::vector<std::uint32_t> labels;  // N entries in [0, num_classes)
  std::uint32_t num_classes = 0;

  std::size_t num_samples() const { return views.empty() ? 0 : views.front().rows; }
  std::size_t num_views() const { return views.size(); }
  std::vector<std::size_t> view_dims() const;
};

// Directory layout:
//   meta           text: views=V, samples=N, classes=K, dim.<v>=D_v
//   view_<v>.bin   magic "MVDS", u32 version=1, u32 rows, u32 cols, f32 row-major
//   labels.bin     magic "MVLB", u32 N, u32 class ids
// All integers little-endian.
MultiViewDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);

// Per-view global min-max rescale to [0,1]; constant views map to 0. Applied
// by load_dataset and generate_synthetic.
void minmax_normalize(MultiViewDataset& ds);

struct SyntheticSpec {
  std::size_t num_samples = 1000;
  std::size_t num_classes = 3;
  std::size_t num_views = 2;
  std::vector<std::size_t> view_dims;
  double cluster_separation = 5.0;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;
};

// K Gaussian clusters in a shared latent space; each view is an independent
// random linear embedding of that latent plus view noise.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace fmcsc
