#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <omp.h>

#include "playstyle/kernels.hpp"

namespace playstyle::kernels {
namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

class KernelShapes : public ::testing::TestWithParam<std::tuple<std::size_t, std::size_t, std::size_t>> {};

TEST_P(KernelShapes, ParallelMatchesSerial) {
  auto [n, in, out] = GetParam();
  std::mt19937_64 rng(n * 131 + in * 7 + out);
  const auto x = random_vec(n * in, rng);
  const auto w = random_vec(out * in, rng);
  const auto b = random_vec(out, rng);
  const auto dy = random_vec(n * out, rng);

  std::vector<double> y_s(n * out), y_p(n * out);
  serial::dense_forward<double>(x, w, b, y_s, n, in, out);
  parallel::dense_forward<double>(x, w, b, y_p, n, in, out);
  for (std::size_t i = 0; i < y_s.size(); ++i) EXPECT_NEAR(y_s[i], y_p[i], 1e-12);

  std::vector<double> dx_s(n * in, 7.0), dx_p(n * in, -3.0);
  serial::dense_backward_input<double>(dy, w, dx_s, n, in, out);
  parallel::dense_backward_input<double>(dy, w, dx_p, n, in, out);
  for (std::size_t i = 0; i < dx_s.size(); ++i) EXPECT_NEAR(dx_s[i], dx_p[i], 1e-12);

  std::vector<double> dw_s(out * in, 0.5), dw_p(out * in, 0.5), db_s(out, 1.0), db_p(out, 1.0);
  serial::dense_backward_params<double>(x, dy, dw_s, db_s, n, in, out);
  parallel::dense_backward_params<double>(x, dy, dw_p, db_p, n, in, out);
  for (std::size_t i = 0; i < dw_s.size(); ++i) EXPECT_NEAR(dw_s[i], dw_p[i], 1e-12);
  for (std::size_t i = 0; i < db_s.size(); ++i) EXPECT_NEAR(db_s[i], db_p[i], 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Shapes, KernelShapes,
                         ::testing::Values(std::make_tuple(1, 1, 1), std::make_tuple(3, 5, 2),
                                           std::make_tuple(64, 17, 33), std::make_tuple(257, 64, 8)));

TEST(Kernels, DenseForwardByHand) {
  // [1 2] x W^T with W = [[1 0],[0 1],[1 1]], b = [0, 1, -1]
  std::vector<float> x{1, 2}, w{1, 0, 0, 1, 1, 1}, b{0, 1, -1}, y(3);
  serial::dense_forward<float>(x, w, b, y, 1, 2, 3);
  EXPECT_EQ(y, (std::vector<float>{1, 3, 2}));
}

TEST(Kernels, BackwardParamsAccumulates) {
  std::vector<double> x{1, 2}, dy{3}, dw{10, 10}, db{5};
  serial::dense_backward_params<double>(x, dy, dw, db, 1, 2, 1);
  EXPECT_EQ(dw, (std::vector<double>{13, 16}));
  EXPECT_EQ(db, (std::vector<double>{8}));
}

TEST(Kernels, NearestRowsTiesGoLow) {
  std::vector<double> book{0, 0, 1, 1};
  std::vector<double> z{0.5, 0.5, 0.1, 0.2, 1, 1, 0.9, 0.4};
  std::vector<std::uint32_t> s(4), p(4);
  serial::nearest_rows<double>(z, book, s, 4, 2, 2);
  parallel::nearest_rows<double>(z, book, p, 4, 2, 2);
  EXPECT_EQ(s, (std::vector<std::uint32_t>{0, 0, 1, 1}));
  EXPECT_EQ(s, p);
}

TEST(Kernels, NearestRowsRandomAgree) {
  std::mt19937_64 rng(5);
  const std::size_t n = 500, d = 6, k = 13;
  const auto z = random_vec(n * d, rng);
  const auto book = random_vec(k * d, rng);
  std::vector<std::uint32_t> s(n), p(n);
  serial::nearest_rows<double>(z, book, s, n, d, k);
  parallel::nearest_rows<double>(z, book, p, n, d, k);
  EXPECT_EQ(s, p);
  for (std::size_t i = 0; i < n; ++i) {
    auto dist = [&](std::size_t j) {
      double acc = 0;
      for (std::size_t c = 0; c < d; ++c) acc += (z[i * d + c] - book[j * d + c]) * (z[i * d + c] - book[j * d + c]);
      return acc;
    };
    for (std::size_t j = 0; j < k; ++j) EXPECT_LE(dist(s[i]), dist(j));
  }
}

TEST(Kernels, ParallelIsDeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(11);
  const std::size_t n = 100, in = 40, out = 30;
  const auto x = random_vec(n * in, rng), w = random_vec(out * in, rng), b = random_vec(out, rng);
  std::vector<double> y1(n * out), y4(n * out);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  parallel::dense_forward<double>(x, w, b, y1, n, in, out);
  omp_set_num_threads(4);
  parallel::dense_forward<double>(x, w, b, y4, n, in, out);
  omp_set_num_threads(saved);
  EXPECT_EQ(y1, y4);
}

}  // namespace
}  // namespace playstyle::kernels
