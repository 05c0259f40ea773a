#include "stck/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "testutil.hpp"

namespace k = stck::kernels;

namespace {

class BackendGuard {
 public:
  BackendGuard() : saved_(k::active_backend()) {}
  ~BackendGuard() { k::force_backend(saved_); }

 private:
  k::Backend saved_;
};

}  // namespace

TEST(Kernels, ScalarDotAxpySum) {
  BackendGuard guard;
  k::force_backend(k::Backend::Scalar);
  const double a[] = {1.0, 2.0, 3.0, 4.0, 5.0};
  const double b[] = {2.0, -1.0, 0.5, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(k::dot(a, b, 5), 1.0 * 2 - 2 + 1.5 + 0 + 5);
  EXPECT_DOUBLE_EQ(k::sum(a, 5), 15.0);
  double y[] = {1.0, 1.0, 1.0, 1.0, 1.0};
  k::axpy(y, 2.0, a, 5);
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[4], 11.0);
}

TEST(Kernels, ReluForwardBackward) {
  BackendGuard guard;
  for (k::Backend backend : {k::Backend::Scalar, k::Backend::Avx2}) {
    if (!k::backend_supported(backend)) continue;
    k::force_backend(backend);
    const double x[] = {-1.0, 2.0, 0.0, -0.5, 3.0, -2.0, 7.0, 1.0, -4.0};
    double out[9];
    k::relu(out, x, 9);
    EXPECT_DOUBLE_EQ(out[0], 0.0);
    EXPECT_DOUBLE_EQ(out[1], 2.0);
    EXPECT_DOUBLE_EQ(out[2], 0.0);
    double gx[9] = {0};
    const double gy[] = {1, 1, 1, 1, 1, 1, 1, 1, 1};
    k::relu_backward(gx, x, gy, 9);
    EXPECT_DOUBLE_EQ(gx[0], 0.0);
    EXPECT_DOUBLE_EQ(gx[1], 1.0);
    EXPECT_DOUBLE_EQ(gx[2], 0.0);  // relu'(0) = 0
    EXPECT_DOUBLE_EQ(gx[4], 1.0);
  }
}

// The vector variants may reassociate; equivalence up to 1e-12 relative.
TEST(Kernels, Avx2MatchesScalar) {
  if (!k::backend_supported(k::Backend::Avx2)) GTEST_SKIP() << "no AVX2/FMA on this host";
  BackendGuard guard;
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 17u, 64u, 577u}) {
    auto a = testutil::random_tensor({static_cast<int>(n)}, rng);
    auto b = testutil::random_tensor({static_cast<int>(n)}, rng);

    k::force_backend(k::Backend::Scalar);
    const double dot_s = k::dot(a.data.data(), b.data.data(), n);
    const double sum_s = k::sum(a.data.data(), n);
    std::vector<double> y_s(n, 0.5);
    k::axpy(y_s.data(), 1.7, a.data.data(), n);
    std::vector<double> r_s(n);
    k::relu(r_s.data(), a.data.data(), n);

    k::force_backend(k::Backend::Avx2);
    const double dot_v = k::dot(a.data.data(), b.data.data(), n);
    const double sum_v = k::sum(a.data.data(), n);
    std::vector<double> y_v(n, 0.5);
    k::axpy(y_v.data(), 1.7, a.data.data(), n);
    std::vector<double> r_v(n);
    k::relu(r_v.data(), a.data.data(), n);

    EXPECT_NEAR(dot_s, dot_v, 1e-12 * std::max(1.0, std::abs(dot_s)));
    EXPECT_NEAR(sum_s, sum_v, 1e-12 * std::max(1.0, std::abs(sum_s)));
    for (std::size_t i = 0; i < n; ++i) {
      // FMA in the vector path fuses the multiply-add rounding.
      EXPECT_NEAR(y_s[i], y_v[i], 1e-12 * std::max(1.0, std::abs(y_s[i])));
      EXPECT_DOUBLE_EQ(r_s[i], r_v[i]);
    }
  }
}

TEST(Kernels, ForceUnsupportedBackendThrows) {
  if (k::backend_supported(k::Backend::Avx2)) GTEST_SKIP() << "AVX2 supported here";
  EXPECT_THROW(k::force_backend(k::Backend::Avx2), std::runtime_error);
}
