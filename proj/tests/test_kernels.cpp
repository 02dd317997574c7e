#include <cmath>
#include <vector>

#include <doctest.h>

#include "ews/kernels.hpp"
#include "test_util.hpp"

using namespace ews;
using testsupport::TestRng;

namespace {

std::vector<double> random_vec(TestRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("scalar reference semantics") {
  const auto& k = kernels::scalar_ops();
  std::vector<double> x = {1.0, 2.0, -3.0};
  std::vector<double> y = {0.5, 0.0, 1.0};
  k.axpy(3, 2.0, x.data(), y.data());
  CHECK(y == std::vector<double>{2.5, 4.0, -5.0});

  k.scale_to(3, -1.0, x.data(), y.data());
  CHECK(y == std::vector<double>{-1.0, -2.0, 3.0});

  k.accum(3, x.data(), y.data());
  CHECK(y == std::vector<double>{0.0, 0.0, 0.0});

  y = {2.0, 3.0, 4.0};
  k.elem_mul(3, x.data(), y.data());
  CHECK(y == std::vector<double>{2.0, 6.0, -12.0});

  std::vector<double> outer(6, 1.0);
  std::vector<double> a = {2.0, -1.0};
  k.outer_acc(2, 3, a.data(), x.data(), outer.data());
  CHECK(outer == std::vector<double>{3.0, 5.0, -5.0, 0.0, -1.0, 4.0});

  std::vector<double> mat = {1.0, 0.0, 2.0, 0.0, 3.0, -1.0};  // 2x3
  std::vector<double> mv(2, -7.0);
  k.matvec(2, 3, mat.data(), x.data(), mv.data());
  CHECK(mv == std::vector<double>{-5.0, 9.0});
}

TEST_CASE("mode_apply applies a matrix to the middle index") {
  const auto& k = kernels::scalar_ops();
  // x has shape (pre=2, w=2, post=2); e = [[0,1],[1,0]] swaps the middle slot.
  std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> e = {0, 1, 1, 0};
  std::vector<double> y(8, 0.0);
  k.mode_apply(2, 2, 2, e.data(), x.data(), y.data());
  CHECK(y == std::vector<double>{3, 4, 1, 2, 7, 8, 5, 6});
}

TEST_CASE("batch_matvec and gram_acc reference semantics") {
  const auto& k = kernels::scalar_ops();
  // two 2x2 blocks
  std::vector<double> mats = {1, 0, 0, 1, 2, 0, 0, 2};
  std::vector<double> x = {3.0, -1.0};
  std::vector<double> y(4, 0.0);
  k.batch_matvec(2, 2, 2, mats.data(), x.data(), y.data());
  CHECK(y == std::vector<double>{3.0, -1.0, 6.0, -2.0});

  // gram: out[a*w+b] += sum_j u[j*w+a] c[j*w+b], m=2 rows, w=2
  std::vector<double> u = {1, 2, 3, 4};
  std::vector<double> c = {5, 6, 7, 8};
  std::vector<double> out(4, 0.0);
  k.gram_acc(2, 2, u.data(), c.data(), out.data());
  CHECK(out == std::vector<double>{26.0, 30.0, 38.0, 44.0});
}

TEST_CASE("avx2 variant is bit-identical to scalar on every op") {
  if (!kernels::avx2_supported()) {
    MESSAGE("avx2 not available; comparing scalar against itself");
  }
  const auto& sc = kernels::scalar_ops();
  const auto& vx = kernels::avx2_ops();
  TestRng rng(99);

  for (std::size_t n : {1u, 2u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 64u, 129u}) {
    const auto x = random_vec(rng, n);
    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    sc.axpy(n, 1.317, x.data(), y1.data());
    vx.axpy(n, 1.317, x.data(), y2.data());
    REQUIRE(y1 == y2);

    sc.scale_to(n, -0.77, x.data(), y1.data());
    vx.scale_to(n, -0.77, x.data(), y2.data());
    REQUIRE(y1 == y2);

    sc.accum(n, x.data(), y1.data());
    vx.accum(n, x.data(), y2.data());
    REQUIRE(y1 == y2);

    sc.elem_mul(n, x.data(), y1.data());
    vx.elem_mul(n, x.data(), y2.data());
    REQUIRE(y1 == y2);
  }

  for (std::size_t rows : {1u, 3u, 8u}) {
    for (std::size_t cols : {1u, 4u, 9u, 17u}) {
      const auto e = random_vec(rng, rows * cols);
      const auto x = random_vec(rng, cols);
      std::vector<double> y1(rows), y2(rows);
      sc.matvec(rows, cols, e.data(), x.data(), y1.data());
      vx.matvec(rows, cols, e.data(), x.data(), y2.data());
      REQUIRE(y1 == y2);

      const auto a = random_vec(rng, rows);
      auto c1 = random_vec(rng, rows * cols);
      auto c2 = c1;
      sc.outer_acc(rows, cols, a.data(), x.data(), c1.data());
      vx.outer_acc(rows, cols, a.data(), x.data(), c2.data());
      REQUIRE(c1 == c2);
    }
  }

  {
    const std::size_t pre = 5, w = 4, post = 7;
    const auto e = random_vec(rng, w * w);
    const auto x = random_vec(rng, pre * w * post);
    std::vector<double> y1(pre * w * post), y2(pre * w * post);
    sc.mode_apply(pre, w, post, e.data(), x.data(), y1.data());
    vx.mode_apply(pre, w, post, e.data(), x.data(), y2.data());
    REQUIRE(y1 == y2);
  }

  {
    const std::size_t count = 9, rows = 3, cols = 3;
    const auto mats = random_vec(rng, count * rows * cols);
    const auto x = random_vec(rng, cols);
    std::vector<double> y1(count * rows), y2(count * rows);
    sc.batch_matvec(count, rows, cols, mats.data(), x.data(), y1.data());
    vx.batch_matvec(count, rows, cols, mats.data(), x.data(), y2.data());
    REQUIRE(y1 == y2);

    const auto u = random_vec(rng, count * cols);
    const auto c = random_vec(rng, count * cols);
    auto o1 = random_vec(rng, cols * cols);
    auto o2 = o1;
    sc.gram_acc(count, cols, u.data(), c.data(), o1.data());
    vx.gram_acc(count, cols, u.data(), c.data(), o2.data());
    REQUIRE(o1 == o2);
  }
}

TEST_CASE("variant selection round-trips") {
  const kernels::Variant before = kernels::active_variant();
  kernels::set_variant(kernels::Variant::scalar);
  CHECK(kernels::active_variant() == kernels::Variant::scalar);
  kernels::set_variant_auto();
  if (kernels::avx2_supported()) {
    CHECK(kernels::active_variant() == kernels::Variant::avx2);
  } else {
    CHECK(kernels::active_variant() == kernels::Variant::scalar);
  }
  kernels::set_variant(before);
}

TEST_SUITE_END();
