#include "stck/searcher.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stck/losses.hpp"
#include "stck/motion.hpp"
#include "testutil.hpp"

using namespace stck;
using namespace stck::searcher;

namespace {

// Dynamic weights that score a cell by -( |dx| + |dy| ) + 2 over the motion
// channels: layer 1 splits +-x / +-y, layer 2 passes them through, layer 3
// sums them negatively. Response peaks at the cell nearest the motion center.
std::vector<double> motion_only_theta() {
  std::vector<double> theta(kThetaLen, 0.0);
  auto w1 = [&](int out, int in) -> double& { return theta[static_cast<std::size_t>(out) * 18 + in]; };
  w1(0, 0) = 1.0;   // +dx
  w1(1, 0) = -1.0;  // -dx
  w1(2, 1) = 1.0;   // +dy
  w1(3, 1) = -1.0;  // -dy
  auto w2 = [&](int out, int in) -> double& {
    return theta[152 + static_cast<std::size_t>(out) * 8 + in];
  };
  for (int i = 0; i < 4; ++i) w2(i, i) = 1.0;
  for (int i = 0; i < 4; ++i) theta[224 + static_cast<std::size_t>(i)] = -1.0;  // layer3 weights
  theta[232] = 2.0;                                                             // layer3 bias
  return theta;
}

Tensor random_feature(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return testutil::random_tensor({kMotionAwareChannels, h, w}, rng);
}

}  // namespace

TEST(UnpackWeights, ZerosAndPartition) {
  ad::Var zero = ad::constant(Tensor({kThetaLen}));
  const UnpackedWeights u0 = unpack_weights(zero);
  EXPECT_EQ(u0.w1->value.shape, (Shape{8, 18, 1, 1}));
  EXPECT_EQ(u0.b1->value.shape, (Shape{8}));
  EXPECT_EQ(u0.w2->value.shape, (Shape{8, 8, 1, 1}));
  EXPECT_EQ(u0.w3->value.shape, (Shape{1, 8, 1, 1}));
  for (double v : u0.w1->value.data) EXPECT_EQ(v, 0.0);

  std::vector<double> ramp(kThetaLen);
  for (int i = 0; i < kThetaLen; ++i) ramp[static_cast<std::size_t>(i)] = i;
  const UnpackedWeights u = unpack_weights(ad::constant(Tensor({kThetaLen}, ramp)));
  EXPECT_DOUBLE_EQ(u.w1->value.data.front(), 0.0);
  EXPECT_DOUBLE_EQ(u.w1->value.data.back(), 143.0);
  EXPECT_DOUBLE_EQ(u.b1->value.data.front(), 144.0);
  EXPECT_DOUBLE_EQ(u.b1->value.data.back(), 151.0);
  EXPECT_DOUBLE_EQ(u.w2->value.data.front(), 152.0);
  EXPECT_DOUBLE_EQ(u.w2->value.data.back(), 215.0);
  EXPECT_DOUBLE_EQ(u.b2->value.data.front(), 216.0);
  EXPECT_DOUBLE_EQ(u.w3->value.data.front(), 224.0);
  EXPECT_DOUBLE_EQ(u.w3->value.data.back(), 231.0);
  EXPECT_DOUBLE_EQ(u.b3->value.data.front(), 232.0);
}

TEST(UnpackWeights, WrongLengthNames233) {
  try {
    unpack_weights(ad::constant(Tensor({232})));
    FAIL() << "expected length error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("233"), std::string::npos);
  }
}

TEST(Search, ZeroThetaGivesHalfEverywhere) {
  const Tensor r = search_value(random_feature(6, 7, 1), std::vector<double>(kThetaLen, 0.0));
  ASSERT_EQ(r.shape, (Shape{6, 7}));
  for (double v : r.data) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Search, FullyConvolutionalOverSizes) {
  std::mt19937_64 rng(2);
  std::vector<double> theta(kThetaLen);
  for (double& v : theta) v = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
  const Tensor r1 = search_value(random_feature(4, 5, 3), theta);
  const Tensor r2 = search_value(random_feature(12, 9, 4), theta);
  EXPECT_EQ(r1.shape, (Shape{4, 5}));
  EXPECT_EQ(r2.shape, (Shape{12, 9}));
  for (double v : r1.data) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Search, WrongChannelCountThrows) {
  Tensor bad({17, 4, 4});
  EXPECT_THROW(search_value(bad, std::vector<double>(kThetaLen, 0.0)), std::invalid_argument);
}

TEST(Search, MotionThetaPeaksAtPredictedCenter) {
  const std::vector<double> theta = motion_only_theta();
  for (const auto& m : {motion::Vec2{5.0, 9.0}, motion::Vec2{0.2, 3.8}, motion::Vec2{10.6, 0.4}}) {
    Tensor f({kSearchChannels, 12, 12});  // appearance channels silent
    const Tensor o = motion::build_motion_map(m, 12, 12);
    ad::NoGradGuard ng;
    const ad::Var ft = motion::make_motion_aware(ad::constant(f), o);
    const Tensor r = search(ft, ad::constant(Tensor({kThetaLen}, theta)))->value;
    const Peak p = find_peak(r);
    EXPECT_EQ(p.x, static_cast<int>(std::lround(m.x)));
    EXPECT_EQ(p.y, static_cast<int>(std::lround(m.y)));
  }
}

// Translating the motion center moves only the motion channels and the peak
// translates with it while it stays in-grid.
TEST(Search, PeakTranslatesWithMotionCenter) {
  const std::vector<double> theta = motion_only_theta();
  std::mt19937_64 rng(5);
  Tensor f = testutil::random_tensor({kSearchChannels, 16, 16}, rng, -0.05, 0.05);
  ad::NoGradGuard ng;
  const motion::Vec2 m0{4.0, 6.0};
  for (const auto& d : {motion::Vec2{3.0, 2.0}, motion::Vec2{-2.0, 5.0}, motion::Vec2{7.0, -1.0}}) {
    const Tensor r0 =
        search(motion::make_motion_aware(ad::constant(f), motion::build_motion_map(m0, 16, 16)),
               ad::constant(Tensor({kThetaLen}, theta)))
            ->value;
    const motion::Vec2 m1{m0.x + d.x, m0.y + d.y};
    const Tensor r1 =
        search(motion::make_motion_aware(ad::constant(f), motion::build_motion_map(m1, 16, 16)),
               ad::constant(Tensor({kThetaLen}, theta)))
            ->value;
    const Peak p0 = find_peak(r0);
    const Peak p1 = find_peak(r1);
    EXPECT_EQ(p1.x, p0.x + static_cast<int>(d.x));
    EXPECT_EQ(p1.y, p0.y + static_cast<int>(d.y));
  }
}

TEST(Search, DeterministicBitIdentical) {
  std::mt19937_64 rng(6);
  const Tensor f = random_feature(10, 10, 7);
  std::vector<double> theta(kThetaLen);
  for (double& v : theta) v = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
  const Tensor a = search_value(f, theta);
  const Tensor b = search_value(f, theta);
  EXPECT_EQ(a.data, b.data);
}

TEST(FindPeak, ExamplesAndTies) {
  Tensor r({6, 9});
  r.at(3, 7) = 0.9;
  const Peak p = find_peak(r);
  EXPECT_EQ(p.x, 7);
  EXPECT_EQ(p.y, 3);
  EXPECT_DOUBLE_EQ(p.confidence, 0.9);

  const Peak uniform = find_peak(Tensor({4, 4}, std::vector<double>(16, 0.5)));
  EXPECT_EQ(uniform.x, 0);
  EXPECT_EQ(uniform.y, 0);
  EXPECT_DOUBLE_EQ(uniform.confidence, 0.5);

  Tensor two({12, 12});
  two.at(2, 2) = 0.8;
  two.at(9, 9) = 0.8;
  const Peak first = find_peak(two);
  EXPECT_EQ(first.x, 2);
  EXPECT_EQ(first.y, 2);
}

TEST(BatchSearch, MatchesIndependentCalls) {
  EXPECT_TRUE(batch_search({}, {}).empty());

  std::mt19937_64 rng(8);
  std::vector<Tensor> feats;
  std::vector<std::vector<double>> thetas;
  for (int i = 0; i < 3; ++i) {
    feats.push_back(random_feature(7, 5, 100 + static_cast<std::uint64_t>(i)));
    std::vector<double> theta(kThetaLen);
    for (double& v : theta) v = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
    thetas.push_back(std::move(theta));
  }
  const auto batch = batch_search(feats, thetas);
  ASSERT_EQ(batch.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    const Tensor single = search_value(feats[static_cast<std::size_t>(i)], thetas[static_cast<std::size_t>(i)]);
    EXPECT_EQ(batch[static_cast<std::size_t>(i)].data, single.data);
  }

  EXPECT_THROW(batch_search(feats, {thetas[0]}), std::invalid_argument);
}

// The pipeline's distinguishing gradient path: the search loss must
// differentiate through the dynamic weights.
TEST(Search, GradientWrtThetaMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  const Tensor f = random_feature(6, 6, 11);
  ad::Var theta = ad::param(testutil::random_tensor({kThetaLen}, rng, -0.3, 0.3));

  Tensor target({6, 6});
  losses::render_gaussian(target, 2, 3, 2.0);

  auto forward = [&]() {
    ad::NoGradGuard ng;
    return losses::search_focal_loss(search(ad::constant(f), theta), target)->value.data[0];
  };
  ad::Var loss = losses::search_focal_loss(search(ad::constant(f), theta), target);
  ad::backward(loss);

  testutil::FdFailure fail;
  EXPECT_TRUE(testutil::fd_check_param(theta, forward, theta->grad, &fail))
      << "theta[" << fail.index << "] analytic " << fail.analytic << " vs fd " << fail.fd;
}
