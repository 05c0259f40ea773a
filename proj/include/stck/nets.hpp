#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stck/autodiff.hpp"
#include "stck/dims.hpp"
#include "stck/tensor.hpp"

namespace stck {

struct Frame {
  int width = 0;   // pixels, multiple of 4
  int height = 0;  // pixels, multiple of 4
  int index = 0;
  Tensor pixels;  // [3,H,W], values in [0,1]
};

Frame make_frame(int width, int height, int index);
void validate_frame(const Frame& frame);

struct HeadOutputs {
  ad::Var heatmap;   // [C,H,W], post-sigmoid
  ad::Var size_map;  // [2,H,W]: height, width in grid cells
  ad::Var search;    // [16,H,W]
  ad::Var weights;   // [233,H,W]
};

struct Detection {
  double x = 0.0, y = 0.0;  // center, output-grid coordinates
  double h = 0.0, w = 0.0;  // size in grid cells
  double score = 0.0;       // omega = heatmap value at the peak
  std::vector<double> theta;
  int cls = 0;
  std::int64_t id = -1;
};

struct NetConfig {
  int num_classes = 1;
};

// Backbone (4 convs, 3->16->32->32->64, strides 1,2,1,2) plus four heads
// (3x3 conv 64->32 + ReLU + 1x1 conv) for heatmap, size, search feature and
// dynamic-weight maps. Total downsampling 4.
class SearchTrackNet {
 public:
  SearchTrackNet(NetConfig cfg, std::uint64_t seed);

  const NetConfig& config() const { return cfg_; }

  // [3,H,W] frame -> [64,H/4,W/4]; frame dimensions must be multiples of 4.
  ad::Var backbone_forward(const Frame& frame) const;
  HeadOutputs heads_forward(const ad::Var& features) const;
  // Controller head only; training samples dynamic weights from the previous
  // frame and needs none of the other heads there.
  ad::Var controller_forward(const ad::Var& features) const;

  std::vector<ad::Var> parameters() const;
  const std::vector<std::pair<std::string, ad::Var>>& named_parameters() const {
    return params_;
  }
  ad::Var parameter(const std::string& name) const;

  void save(const std::string& path) const;
  static SearchTrackNet load(const std::string& path);

 private:
  explicit SearchTrackNet(NetConfig cfg);
  ad::Var conv(const std::string& name, const ad::Var& x, int stride, int pad) const;
  ad::Var head(const std::string& name, const ad::Var& features) const;
  void register_param(const std::string& name, Tensor t);

  NetConfig cfg_;
  std::vector<std::pair<std::string, ad::Var>> params_;
};

// Cells that are >=-maxima of their 3x3 neighborhood with score >= tau_det,
// at most max_k per class, sorted by score descending (row-major on ties).
std::vector<Detection> extract_detections(const HeadOutputs& out, double tau_det,
                                          int max_k);

// Channel fiber of the weight map at the cell nearest to (x, y).
std::vector<double> sample_weights(const Tensor& weight_map, double x, double y);

}  // namespace stck
