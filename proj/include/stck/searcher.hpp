#pragma once

#include <vector>

#include "stck/autodiff.hpp"
#include "stck/dims.hpp"
#include "stck/tensor.hpp"

namespace stck::searcher {

// theta partition: layer1 18->8 [0,144)+[144,152), layer2 8->8
// [152,216)+[216,224), layer3 8->1 [224,232)+[232,233).
struct UnpackedWeights {
  ad::Var w1, b1, w2, b2, w3, b3;
};

UnpackedWeights unpack_weights(const ad::Var& theta);

// R = sigmoid(conv1x1(relu(conv1x1(relu(conv1x1(F~)))))), fully convolutional;
// motion_aware must be [18,H,W], theta length 233. Returns [H,W].
ad::Var search(const ad::Var& motion_aware, const ad::Var& theta);

// Convenience gradient-free path over plain tensors.
Tensor search_value(const Tensor& motion_aware, const std::vector<double>& theta);

struct Peak {
  int x = 0, y = 0;
  double confidence = 0.0;  // upsilon
};

// Global argmax; ties resolved row-major (first occurrence wins).
Peak find_peak(const Tensor& response);

std::vector<Tensor> batch_search(const std::vector<Tensor>& features,
                                 const std::vector<std::vector<double>>& thetas);

}  // namespace stck::searcher
