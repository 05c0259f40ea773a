#include "stck/autodiff.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "testutil.hpp"

using namespace stck;
namespace a = stck::ad;

namespace {

// loss = sum(f(xs...) * c) with a fixed random cotangent c; exercises the full
// Jacobian action of the op.
double projected_loss(const a::Var& out, const Tensor& cot) {
  return a::sum(a::mul(out, a::constant(cot)))->value.data[0];
}

}  // namespace

TEST(Conv2d, ZeroInputGivesBias) {
  a::Var x = a::constant(Tensor({1, 3, 3}));
  std::mt19937_64 rng(1);
  a::Var w = a::constant(testutil::random_tensor({2, 1, 3, 3}, rng));
  a::Var b = a::constant(Tensor({2}, {0.7, -0.3}));
  a::Var y = a::conv2d(x, w, b, 1, 1);
  for (int oy = 0; oy < 3; ++oy)
    for (int ox = 0; ox < 3; ++ox) {
      EXPECT_DOUBLE_EQ(y->value.at(0, oy, ox), 0.7);
      EXPECT_DOUBLE_EQ(y->value.at(1, oy, ox), -0.3);
    }
}

TEST(Conv2d, IdentityKernel) {
  std::mt19937_64 rng(2);
  Tensor img = testutil::random_tensor({1, 5, 4}, rng);
  a::Var y = a::conv2d(a::constant(img), a::constant(Tensor({1, 1, 1, 1}, {1.0})),
                       a::constant(Tensor({1}, {0.0})), 1, 0);
  EXPECT_EQ(y->value.shape, (Shape{1, 5, 4}));
  for (std::size_t i = 0; i < img.data.size(); ++i)
    EXPECT_DOUBLE_EQ(y->value.data[i], img.data[i]);
}

TEST(Conv2d, AllOnesKernelSumsTo45) {
  Tensor img({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  a::Var y = a::conv2d(a::constant(img), a::constant(Tensor({1, 1, 3, 3}, std::vector<double>(9, 1.0))),
                       a::constant(Tensor({1}, {0.0})), 1, 0);
  EXPECT_EQ(y->value.shape, (Shape{1, 1, 1}));
  EXPECT_DOUBLE_EQ(y->value.data[0], 45.0);
}

TEST(Conv2d, ShapeMismatchNamesDimension) {
  a::Var x = a::constant(Tensor({3, 4, 4}));
  a::Var w = a::constant(Tensor({2, 5, 3, 3}));
  a::Var b = a::constant(Tensor({2}));
  try {
    a::conv2d(x, w, b, 1, 1);
    FAIL() << "expected shape error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("in-channels 5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("input channels 3"), std::string::npos) << msg;
  }
}

TEST(Conv2d, MatchesNaiveReference) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const int stride = trial % 2 == 0 ? 1 : 2;
    const int pad = trial % 3 == 0 ? 0 : 1;
    const int k = 3;
    Tensor x = testutil::random_tensor({2, 6, 5}, rng);
    Tensor w = testutil::random_tensor({3, 2, k, k}, rng);
    Tensor b = testutil::random_tensor({3}, rng);
    a::Var y = a::conv2d(a::constant(x), a::constant(w), a::constant(b), stride, pad);
    Tensor ref = testutil::naive_conv2d(x, w, b, stride, pad);
    ASSERT_EQ(y->value.shape, ref.shape);
    for (std::size_t i = 0; i < ref.data.size(); ++i)
      EXPECT_NEAR(y->value.data[i], ref.data[i], 1e-12);
  }
}

TEST(Elementwise, ReluSigmoidConcatExamples) {
  a::Var x = a::constant(Tensor({1, 1, 2}, {-1.0, 2.0}));
  a::Var r = a::relu(x);
  EXPECT_DOUBLE_EQ(r->value.data[0], 0.0);
  EXPECT_DOUBLE_EQ(r->value.data[1], 2.0);

  a::Var s = a::sigmoid(a::constant(Tensor({1}, {0.0})));
  EXPECT_DOUBLE_EQ(s->value.data[0], 0.5);

  std::mt19937_64 rng(4);
  Tensor motion = testutil::random_tensor({2, 4, 4}, rng);
  Tensor feat = testutil::random_tensor({16, 4, 4}, rng);
  a::Var cat = a::concat_channels(a::constant(motion), a::constant(feat));
  EXPECT_EQ(cat->value.shape, (Shape{18, 4, 4}));

  EXPECT_THROW(a::concat_channels(a::constant(Tensor({1, 3, 3})), a::constant(Tensor({1, 4, 4}))),
               std::invalid_argument);
}

TEST(Elementwise, ConcatSliceRoundTripBitExact) {
  std::mt19937_64 rng(5);
  Tensor ta = testutil::random_tensor({3, 5, 4}, rng);
  Tensor tb = testutil::random_tensor({6, 5, 4}, rng);
  a::Var cat = a::concat_channels(a::constant(ta), a::constant(tb));
  a::Var sa = a::slice_channels(cat, 0, 3);
  a::Var sb = a::slice_channels(cat, 3, 9);
  EXPECT_EQ(sa->value.data, ta.data);
  EXPECT_EQ(sb->value.data, tb.data);
}

TEST(Backward, LinearLossGradIsInput) {
  Tensor xv({4}, {2.0, -1.0, 0.5, 3.0});
  a::Var w = a::param(Tensor({4}, {0.1, 0.2, 0.3, 0.4}));
  a::Var loss = a::sum(a::mul(w, a::constant(xv)));
  a::backward(loss);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w->grad[static_cast<std::size_t>(i)], xv.data[static_cast<std::size_t>(i)]);
}

TEST(Backward, SigmoidSquaredChainRule) {
  a::Var w = a::param(Tensor({1}, {0.0}));
  a::Var s = a::sigmoid(w);
  a::Var loss = a::sum(a::mul(s, s));
  a::backward(loss);
  // d/dw sigmoid(w)^2 at 0 = 2 * 0.5 * 0.25 = 0.25
  EXPECT_NEAR(w->grad[0], 0.25, 1e-12);
}

TEST(Backward, CalledTwiceThrows) {
  a::Var w = a::param(Tensor({1}, {0.3}));
  a::Var loss = a::sum(a::sigmoid(w));
  a::backward(loss);
  EXPECT_THROW(a::backward(loss), std::runtime_error);
}

TEST(Backward, NonScalarLossThrows) {
  a::Var w = a::param(Tensor({2}, {0.3, 0.4}));
  EXPECT_THROW(a::backward(a::sigmoid(w)), std::invalid_argument);
}

TEST(Sgd, PlainStep) {
  a::Var p = a::param(Tensor({1}, {1.0}));
  p->set_grad({1.0});
  a::sgd_step({p}, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(p->value.data[0], 0.9);
}

TEST(Sgd, MomentumRecurrence) {
  a::Var p = a::param(Tensor({1}, {1.0}));
  p->set_grad({1.0});
  a::sgd_step({p}, 0.1, 0.9);
  EXPECT_DOUBLE_EQ(p->value.data[0], 0.9);
  p->set_grad({1.0});
  a::sgd_step({p}, 0.1, 0.9);
  // v2 = 0.9*1 + 1 = 1.9; p = 0.9 - 0.19
  EXPECT_NEAR(p->value.data[0], 0.71, 1e-15);
}

TEST(Sgd, ZeroGradLeavesParamUnchanged) {
  a::Var p = a::param(Tensor({3}, {1.0, 2.0, 3.0}));
  p->set_grad({0.0, 0.0, 0.0});
  a::sgd_step({p}, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(p->value.data[0], 1.0);
  EXPECT_DOUBLE_EQ(p->value.data[2], 3.0);
}

TEST(Sgd, MissingGradThrows) {
  a::Var p = a::param(Tensor({2}, {1.0, 2.0}));
  EXPECT_THROW(a::sgd_step({p}, 0.1, 0.0), std::runtime_error);
}

TEST(Sgd, GradsZeroedAfterStep) {
  a::Var p = a::param(Tensor({2}, {1.0, 2.0}));
  p->set_grad({1.0, -2.0});
  a::sgd_step({p}, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(p->grad[0], 0.0);
  EXPECT_DOUBLE_EQ(p->grad[1], 0.0);
  EXPECT_THROW(a::sgd_step({p}, 0.1, 0.0), std::runtime_error);
}

// Analytic gradients vs central finite differences for every differentiable
// op, random tensors <= 64 elements, 20 seeds.
TEST(GradCheck, AllOpsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);

    // conv2d (stride/pad vary by seed)
    {
      const int stride = seed % 2 == 0 ? 1 : 2;
      const int pad = seed % 3 == 0 ? 0 : 1;
      a::Var x = a::param(testutil::random_tensor({2, 4, 4}, rng));
      a::Var w = a::param(testutil::random_tensor({2, 2, 3, 3}, rng));
      a::Var b = a::param(testutil::random_tensor({2}, rng));
      const int ho = (4 + 2 * pad - 3) / stride + 1;
      Tensor cot = testutil::random_tensor({2, ho, ho}, rng);
      auto fwd = [&]() {
        a::NoGradGuard ng;
        return projected_loss(a::conv2d(x, w, b, stride, pad), cot);
      };
      a::Var loss = a::sum(a::mul(a::conv2d(x, w, b, stride, pad), a::constant(cot)));
      a::backward(loss);
      testutil::FdFailure fail;
      EXPECT_TRUE(testutil::fd_check_param(x, fwd, x->grad, &fail))
          << "conv2d x[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
      EXPECT_TRUE(testutil::fd_check_param(w, fwd, w->grad, &fail))
          << "conv2d w[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
      EXPECT_TRUE(testutil::fd_check_param(b, fwd, b->grad, &fail))
          << "conv2d b[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
    }

    // relu, sigmoid, concat+slice, narrow+reshape, gather, add/mul/scale
    {
      a::Var x = a::param(testutil::random_tensor({4, 4, 4}, rng));
      a::Var y = a::param(testutil::random_tensor({2, 4, 4}, rng));
      Tensor cot6 = testutil::random_tensor({6, 4, 4}, rng);
      auto fwd_cat = [&]() {
        a::NoGradGuard ng;
        return projected_loss(a::concat_channels(a::relu(x), a::sigmoid(y)), cot6);
      };
      a::Var loss = a::sum(
          a::mul(a::concat_channels(a::relu(x), a::sigmoid(y)), a::constant(cot6)));
      a::backward(loss);
      testutil::FdFailure fail;
      EXPECT_TRUE(testutil::fd_check_param(x, fwd_cat, x->grad, &fail))
          << "relu/concat x[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
      EXPECT_TRUE(testutil::fd_check_param(y, fwd_cat, y->grad, &fail))
          << "sigmoid/concat y[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
    }

    {
      a::Var v = a::param(testutil::random_tensor({24}, rng));
      Tensor cot = testutil::random_tensor({2, 3, 2}, rng);
      auto expr = [&]() {
        return a::mul(a::reshape(a::narrow(v, 4, 12), {2, 3, 2}), a::constant(cot));
      };
      auto fwd = [&]() {
        a::NoGradGuard ng;
        return a::sum(expr())->value.data[0];
      };
      a::Var loss = a::sum(expr());
      a::backward(loss);
      testutil::FdFailure fail;
      EXPECT_TRUE(testutil::fd_check_param(v, fwd, v->grad, &fail))
          << "narrow/reshape v[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
    }

    {
      a::Var grid = a::param(testutil::random_tensor({5, 4, 6}, rng));
      Tensor cot = testutil::random_tensor({5}, rng);
      const int gx = static_cast<int>(seed % 6), gy = static_cast<int>(seed % 4);
      auto fwd = [&]() {
        a::NoGradGuard ng;
        return projected_loss(a::gather_fiber(grid, gx, gy), cot);
      };
      a::Var loss = a::sum(a::mul(a::gather_fiber(grid, gx, gy), a::constant(cot)));
      a::backward(loss);
      testutil::FdFailure fail;
      EXPECT_TRUE(testutil::fd_check_param(grid, fwd, grid->grad, &fail))
          << "gather grid[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
    }

    {
      a::Var p = a::param(testutil::random_tensor({8}, rng));
      a::Var q = a::param(testutil::random_tensor({8}, rng));
      auto expr = [&]() { return a::scale(a::add(a::mul(p, q), p), 0.7); };
      auto fwd = [&]() {
        a::NoGradGuard ng;
        return a::sum(expr())->value.data[0];
      };
      a::Var loss = a::sum(expr());
      a::backward(loss);
      testutil::FdFailure fail;
      EXPECT_TRUE(testutil::fd_check_param(p, fwd, p->grad, &fail))
          << "arith p[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
      EXPECT_TRUE(testutil::fd_check_param(q, fwd, q->grad, &fail))
          << "arith q[" << fail.index << "] " << fail.analytic << " vs " << fail.fd;
    }
  }
}

TEST(NoGrad, InferenceRecordsNothing) {
  a::Var w = a::param(Tensor({1}, {0.5}));
  a::NoGradGuard ng;
  a::Var y = a::sigmoid(w);
  EXPECT_FALSE(y->requires_grad);
  EXPECT_TRUE(y->parents.empty());
}
