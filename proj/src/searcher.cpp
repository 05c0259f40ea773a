#include "stck/searcher.hpp"

#include <stdexcept>
#include <string>

namespace stck::searcher {

namespace {

constexpr int kIn = kMotionAwareChannels;  // 18
constexpr int kMid = kSearcherHidden;      // 8

constexpr std::int64_t kW1 = kIn * kMid;          // 144
constexpr std::int64_t kB1 = kW1 + kMid;          // 152
constexpr std::int64_t kW2 = kB1 + kMid * kMid;   // 216
constexpr std::int64_t kB2 = kW2 + kMid;          // 224
constexpr std::int64_t kW3 = kB2 + kMid;          // 232

static_assert(kW3 + 1 == kThetaLen);

}  // namespace

UnpackedWeights unpack_weights(const ad::Var& theta) {
  const Tensor& t = theta->value;
  if (t.ndim() != 1 || t.size() != kThetaLen)
    throw std::invalid_argument("unpack_weights: expected " + std::to_string(kThetaLen) +
                                " weights, got " + shape_str(t.shape));
  UnpackedWeights u;
  u.w1 = ad::reshape(ad::narrow(theta, 0, kW1), {kMid, kIn, 1, 1});
  u.b1 = ad::narrow(theta, kW1, kMid);
  u.w2 = ad::reshape(ad::narrow(theta, kB1, kMid * kMid), {kMid, kMid, 1, 1});
  u.b2 = ad::narrow(theta, kW2, kMid);
  u.w3 = ad::reshape(ad::narrow(theta, kB2, kMid), {1, kMid, 1, 1});
  u.b3 = ad::narrow(theta, kW3, 1);
  return u;
}

ad::Var search(const ad::Var& motion_aware, const ad::Var& theta) {
  const Tensor& f = motion_aware->value;
  if (f.ndim() != 3 || f.dim(0) != kIn)
    throw std::invalid_argument("search: motion-aware feature must have " + std::to_string(kIn) +
                                " channels, got " + shape_str(f.shape));
  const UnpackedWeights u = unpack_weights(theta);
  ad::Var x = ad::relu(ad::conv2d(motion_aware, u.w1, u.b1, 1, 0));
  x = ad::relu(ad::conv2d(x, u.w2, u.b2, 1, 0));
  x = ad::sigmoid(ad::conv2d(x, u.w3, u.b3, 1, 0));
  return ad::reshape(x, {f.dim(1), f.dim(2)});
}

Tensor search_value(const Tensor& motion_aware, const std::vector<double>& theta) {
  ad::NoGradGuard no_grad;
  ad::Var t = ad::constant(Tensor({static_cast<int>(theta.size())}, theta));
  return search(ad::constant(motion_aware), t)->value;
}

Peak find_peak(const Tensor& response) {
  if (response.ndim() != 2 || response.size() == 0)
    throw std::invalid_argument("find_peak: response map must be a non-empty [H,W] tensor");
  const int h = response.dim(0), w = response.dim(1);
  Peak best;
  best.confidence = response.data[0];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = response.at(y, x);
      if (v > best.confidence) {
        best = Peak{x, y, v};
      }
    }
  }
  return best;
}

std::vector<Tensor> batch_search(const std::vector<Tensor>& features,
                                 const std::vector<std::vector<double>>& thetas) {
  if (features.size() != thetas.size())
    throw std::invalid_argument("batch_search: " + std::to_string(features.size()) +
                                " features vs " + std::to_string(thetas.size()) + " weight sets");
  std::vector<Tensor> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i)
    out.push_back(search_value(features[i], thetas[i]));
  return out;
}

}  // namespace stck::searcher
