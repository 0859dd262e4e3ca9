#include <doctest.h>

#include <cmath>

#include "fmcsc/errors.hpp"
#include "fmcsc/tensor.hpp"

using namespace fmcsc;

TEST_CASE("matmul matches a hand computation") {
  Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  Tensor b = Tensor::from_rows({{5, 6}, {7, 8}});
  Tensor c = matmul(a, b);
  CHECK(c(0, 0) == 19);
  CHECK(c(0, 1) == 22);
  CHECK(c(1, 0) == 43);
  CHECK(c(1, 1) == 50);
}

TEST_CASE("matmul_tn and matmul_nt agree with explicit transposes") {
  Tensor a = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  Tensor b = Tensor::from_rows({{1, 0, 1}, {0, 1, 1}});
  Tensor tn = matmul_tn(a, b);  // 3x3
  CHECK(tn.rows == 3);
  CHECK(tn(0, 2) == doctest::Approx(1 * 1 + 4 * 1));
  Tensor nt = matmul_nt(a, b);  // 2x2
  CHECK(nt(0, 0) == doctest::Approx(1 + 3));
  CHECK(nt(1, 1) == doctest::Approx(5 + 6));
}

TEST_CASE("matmul shape mismatch throws") {
  Tensor a(2, 3), b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("axpy") {
  Tensor y = Tensor::from_rows({{1, 1}});
  Tensor x = Tensor::from_rows({{2, 3}});
  axpy(y, 0.5f, x);
  CHECK(y(0, 0) == doctest::Approx(2.0));
  CHECK(y(0, 1) == doctest::Approx(2.5));
}

TEST_CASE("squared_frobenius and finiteness") {
  Tensor t = Tensor::from_rows({{3, 4}});
  CHECK(squared_frobenius(t) == doctest::Approx(25.0));
  CHECK(all_finite(t));
  t(0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK(!all_finite(t));
}

TEST_CASE("concat_cols") {
  Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  Tensor b = Tensor::from_rows({{5}, {6}});
  std::vector<Tensor> blocks{a, b};
  Tensor c = concat_cols(blocks);
  CHECK(c.rows == 2);
  CHECK(c.cols == 3);
  CHECK(c(0, 2) == 5);
  CHECK(c(1, 0) == 3);
}

TEST_CASE("cosine similarity fixtures") {
  CHECK(cosine_similarity(Tensor::from_rows({{1, 0}}), Tensor::from_rows({{1, 0}})) ==
        doctest::Approx(1.0));
  CHECK(cosine_similarity(Tensor::from_rows({{1, 0}}), Tensor::from_rows({{0, 1}})) ==
        doctest::Approx(0.0));
  CHECK(cosine_similarity(Tensor::from_rows({{1, 1}}), Tensor::from_rows({{1, 0}})) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("cosine similarity laws") {
  Tensor a = Tensor::from_rows({{0.3f, -1.2f, 4.0f}});
  Tensor b = Tensor::from_rows({{1.5f, 0.2f, -0.7f}});
  CHECK(cosine_similarity(a, b) == doctest::Approx(cosine_similarity(b, a)));
  Tensor a3 = a;
  for (auto& x : a3.data) x *= 3.0f;
  CHECK(cosine_similarity(a3, a) == doctest::Approx(1.0));
}

TEST_CASE("cosine similarity degenerate inputs") {
  Tensor a = Tensor::from_rows({{1, 0}});
  CHECK_THROWS_AS(cosine_similarity(a, Tensor::from_rows({{0, 0}})), ConfigError);
  CHECK_THROWS_AS(cosine_similarity(a, Tensor::from_rows({{1, 0, 0}})), ShapeError);
}
