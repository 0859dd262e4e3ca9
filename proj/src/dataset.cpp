#include "fmcsc/dataset.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "fmcsc/errors.hpp"

namespace fmcsc {

namespace {

constexpr char kViewMagic[4] = {'M', 'V', 'D', 'S'};
constexpr char kLabelMagic[4] = {'M', 'V', 'L', 'B'};

void write_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& f, const std::string& where) {
  unsigned char b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4))
    throw DataError("truncated read in " + where + " at offset " +
                    std::to_string(static_cast<long long>(f.tellg())));
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

std::vector<std::size_t> MultiViewDataset::view_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& v : views) dims.push_back(v.cols);
  return dims;
}

void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream meta(dir / "meta");
    if (!meta) throw DataError("cannot write " + (dir / "meta").string());
    meta << "views=" << ds.num_views() << "\n";
    meta << "samples=" << ds.num_samples() << "\n";
    meta << "classes=" << ds.num_classes << "\n";
    for (std::size_t v = 0; v < ds.num_views(); ++v)
      meta << "dim." << (v + 1) << "=" << ds.views[v].cols << "\n";
  }
  for (std::size_t v = 0; v < ds.num_views(); ++v) {
    auto path = dir / ("view_" + std::to_string(v + 1) + ".bin");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(kViewMagic, 4);
    write_u32(f, 1);
    write_u32(f, static_cast<std::uint32_t>(ds.views[v].rows));
    write_u32(f, static_cast<std::uint32_t>(ds.views[v].cols));
    // floats are stored in native order; this loader/saver pair targets
    // little-endian hosts, matching the integer convention.
    f.write(reinterpret_cast<const char*>(ds.views[v].data.data()),
            static_cast<std::streamsize>(ds.views[v].data.size() * sizeof(float)));
  }
  {
    auto path = dir / "labels.bin";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(kLabelMagic, 4);
    write_u32(f, static_cast<std::uint32_t>(ds.labels.size()));
    for (std::uint32_t label : ds.labels) write_u32(f, label);
  }
}

MultiViewDataset load_dataset(const std::filesystem::path& dir) {
  auto meta_path = dir / "meta";
  std::ifstream meta(meta_path);
  if (!meta) throw DataError("missing dataset meta file: " + meta_path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("malformed meta line in " + meta_path.string() + ": " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto require = [&](const std::string& key) -> std::size_t {
    auto it = kv.find(key);
    if (it == kv.end())
      throw DataError("meta file missing key '" + key + "' in " + meta_path.string());
    return static_cast<std::size_t>(std::stoull(it->second));
  };
  std::size_t num_views = require("views");
  std::size_t num_samples = require("samples");
  std::size_t num_classes = require("classes");
  if (num_views == 0) throw DataError("dataset has zero views");

  MultiViewDataset ds;
  ds.num_classes = static_cast<std::uint32_t>(num_classes);
  for (std::size_t v = 0; v < num_views; ++v) {
    std::size_t dim = require("dim." + std::to_string(v + 1));
    auto path = dir / ("view_" + std::to_string(v + 1) + ".bin");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("missing view file: " + path.string());
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, kViewMagic, 4) != 0)
      throw DataError("bad magic in " + path.string());
    std::uint32_t version = read_u32(f, path.string());
    if (version != 1)
      throw DataError("unsupported version " + std::to_string(version) + " in " + path.string());
    std::uint32_t rows = read_u32(f, path.string());
    std::uint32_t cols = read_u32(f, path.string());
    if (rows != num_samples || cols != dim)
      throw DataError("shape mismatch in " + path.string() + ": header says " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      ", meta says " + std::to_string(num_samples) + "x" +
                      std::to_string(dim));
    Tensor t(rows, cols);
    if (!f.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float))))
      throw DataError("truncated payload in " + path.string());
    if (!all_finite(t)) throw DataError("non-finite values in " + path.string());
    ds.views.push_back(std::move(t));
  }

  auto labels_path = dir / "labels.bin";
  std::ifstream f(labels_path, std::ios::binary);
  if (!f) throw DataError("missing labels file: " + labels_path.string());
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kLabelMagic, 4) != 0)
    throw DataError("bad magic in " + labels_path.string());
  std::uint32_t n = read_u32(f, labels_path.string());
  if (n != num_samples)
    throw DataError("label count " + std::to_string(n) + " does not match sample count " +
                    std::to_string(num_samples) + " in " + labels_path.string());
  ds.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    ds.labels[i] = read_u32(f, labels_path.string());
    if (num_classes > 0 && ds.labels[i] >= num_classes)
      throw DataError("label out of range at index " + std::to_string(i) + " in " +
                      labels_path.string());
  }

  minmax_normalize(ds);
  return ds;
}

void minmax_normalize(MultiViewDataset& ds) {
  for (auto& view : ds.views) {
    float lo = view.data.empty() ? 0.0f : view.data.front();
    float hi = lo;
    for (float x : view.data) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (hi == lo) {
      for (auto& x : view.data) x = 0.0f;
      continue;
    }
    // Division (not reciprocal multiply) so the extremes land exactly on 0
    // and 1, making normalization idempotent bit-for-bit.
    float range = hi - lo;
    for (auto& x : view.data) x = (x - lo) / range;
  }
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes < 1 || spec.num_samples < spec.num_classes)
    throw ConfigError("generate_synthetic: need N >= K >= 1");
  if (spec.num_views == 0) throw ConfigError("generate_synthetic: need at least one view");
  if (spec.cluster_separation <= 0.0)
    throw ConfigError("generate_synthetic: cluster_separation must be > 0");
  std::vector<std::size_t> dims = spec.view_dims;
  if (dims.empty()) dims.assign(spec.num_views, 16);
  if (dims.size() != spec.num_views)
    throw ConfigError("generate_synthetic: view_dims length does not match num_views");

  Rng rng(spec.seed);
  Rng latent_rng = rng.stream("latent");
  std::size_t latent_dim = std::max<std::size_t>(spec.num_classes, 4);

  // Cluster centers on random directions scaled by the separation; every
  // sample is its center plus unit Gaussian jitter in latent space.
  std::vector<Tensor> centers;
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    Tensor c(1, latent_dim);
    double norm = 0.0;
    for (auto& x : c.data) {
      x = static_cast<float>(latent_rng.normal());
      norm += static_cast<double>(x) * x;
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    for (auto& x : c.data)
      x = static_cast<float>(x / norm * spec.cluster_separation);
    centers.push_back(std::move(c));
  }

  MultiViewDataset ds;
  ds.num_classes = static_cast<std::uint32_t>(spec.num_classes);
  ds.labels.resize(spec.num_samples);
  for (std::size_t i = 0; i < spec.num_samples; ++i)
    ds.labels[i] = static_cast<std::uint32_t>(i % spec.num_classes);

  Tensor latent(spec.num_samples, latent_dim);
  for (std::size_t i = 0; i < spec.num_samples; ++i) {
    const Tensor& c = centers[ds.labels[i]];
    for (std::size_t j = 0; j < latent_dim; ++j)
      latent(i, j) = c(0, j) + static_cast<float>(latent_rng.normal());
  }

  for (std::size_t v = 0; v < spec.num_views; ++v) {
    Rng view_rng = rng.stream("view").stream(v);
    Tensor embed(latent_dim, dims[v]);
    double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    for (auto& x : embed.data) x = static_cast<float>(view_rng.normal() * scale);
    Tensor view = matmul(latent, embed);
    if (spec.noise_sigma > 0.0)
      for (auto& x : view.data)
        x += static_cast<float>(view_rng.normal() * spec.noise_sigma);
    ds.views.push_back(std::move(view));
  }

  minmax_normalize(ds);
  return ds;
}

}  // namespace fmcsc
