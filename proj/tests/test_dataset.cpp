#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fmcsc/cluster.hpp"
#include "fmcsc/dataset.hpp"
#include "fmcsc/errors.hpp"

using namespace fmcsc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("fmcsc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.num_samples = 120;
  spec.num_classes = 3;
  spec.num_views = 2;
  spec.view_dims = {7, 5};
  spec.cluster_separation = 6.0;
  spec.noise_sigma = 0.2;
  spec.seed = 99;
  return spec;
}

}  // namespace

TEST_CASE("synthetic generation is deterministic in the seed") {
  auto a = generate_synthetic(small_spec());
  auto b = generate_synthetic(small_spec());
  REQUIRE(a.num_views() == 2);
  CHECK(a.labels == b.labels);
  for (std::size_t v = 0; v < 2; ++v) CHECK(a.views[v].data == b.views[v].data);
  auto spec = small_spec();
  spec.seed = 100;
  auto c = generate_synthetic(spec);
  CHECK(a.views[0].data != c.views[0].data);
}

TEST_CASE("synthetic metadata and degenerate cases") {
  auto ds = generate_synthetic(small_spec());
  CHECK(ds.num_samples() == 120);
  CHECK(ds.num_classes == 3);
  CHECK(ds.view_dims() == std::vector<std::size_t>{7, 5});

  auto spec = small_spec();
  spec.num_classes = 1;
  auto one = generate_synthetic(spec);
  for (auto l : one.labels) CHECK(l == 0);

  spec.num_classes = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
}

TEST_CASE("views are normalized to [0,1]") {
  auto ds = generate_synthetic(small_spec());
  for (const auto& view : ds.views) {
    float lo = 1e9f, hi = -1e9f;
    for (float x : view.data) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    CHECK(lo == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("noiseless well-separated clusters are recoverable from one view") {
  auto spec = small_spec();
  spec.noise_sigma = 0.0;
  spec.cluster_separation = 50.0;
  spec.num_samples = 150;
  auto ds = generate_synthetic(spec);
  auto assign = kmeans(ds.views[0], spec.num_classes, 1);
  CHECK(clustering_accuracy(assign.labels, ds.labels) == doctest::Approx(1.0));
}

TEST_CASE("save/load round-trip is bit-identical") {
  auto ds = generate_synthetic(small_spec());
  auto dir = temp_dir("roundtrip");
  save_dataset(ds, dir);
  auto loaded = load_dataset(dir);
  CHECK(loaded.num_classes == ds.num_classes);
  CHECK(loaded.labels == ds.labels);
  for (std::size_t v = 0; v < ds.num_views(); ++v)
    CHECK(loaded.views[v].data == ds.views[v].data);
  fs::remove_all(dir);
}

TEST_CASE("loader rejects corrupt inputs with file context") {
  auto ds = generate_synthetic(small_spec());
  auto dir = temp_dir("corrupt");
  save_dataset(ds, dir);

  SUBCASE("missing view file") {
    fs::remove(dir / "view_2.bin");
    CHECK_THROWS_AS(load_dataset(dir), DataError);
  }
  SUBCASE("truncated view file") {
    fs::resize_file(dir / "view_1.bin", 20);
    CHECK_THROWS_AS(load_dataset(dir), DataError);
  }
  SUBCASE("bad magic") {
    std::fstream f(dir / "labels.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
    f.close();
    CHECK_THROWS_AS(load_dataset(dir), DataError);
  }
  SUBCASE("label count mismatch") {
    // Rewrite labels.bin with one fewer entry than the views advertise.
    std::ofstream f(dir / "labels.bin", std::ios::binary | std::ios::trunc);
    std::uint32_t n = static_cast<std::uint32_t>(ds.num_samples() - 1);
    f.write("MVLB", 4);
    f.write(reinterpret_cast<const char*>(&n), 4);
    std::uint32_t zero = 0;
    for (std::uint32_t i = 0; i < n; ++i)
      f.write(reinterpret_cast<const char*>(&zero), 4);
    f.close();
    CHECK_THROWS_AS(load_dataset(dir), DataError);
  }
  fs::remove_all(dir);
}

TEST_CASE("minmax_normalize is idempotent") {
  auto ds = generate_synthetic(small_spec());
  auto once = ds;
  minmax_normalize(once);
  for (std::size_t v = 0; v < ds.num_views(); ++v)
    CHECK(once.views[v].data == ds.views[v].data);  // generator already normalized
}
