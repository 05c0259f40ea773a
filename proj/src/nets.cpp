#include "stck/nets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stck/checkpoint.hpp"
#include "stck/rng.hpp"

namespace stck {

namespace {

// sigmoid(-2.19) ~ 0.1: keeps the focal loss stable at the start of training.
constexpr double kHeatmapBiasInit = -2.19;

struct ConvSpec {
  const char* name;
  int cin, cout, k;
};

// Backbone then heads; registration order fixes checkpoint order.
const ConvSpec kConvSpecs[] = {
    {"backbone.conv1", 3, 16, 3},
    {"backbone.conv2", 16, 32, 3},
    {"backbone.conv3", 32, 32, 3},
    {"backbone.conv4", 32, kBackboneChannels, 3},
    {"head.heat.conv", kBackboneChannels, 32, 3},
    {"head.heat.out", 32, -1, 1},  // cout = num_classes
    {"head.size.conv", kBackboneChannels, 32, 3},
    {"head.size.out", 32, 2, 1},
    {"head.search.conv", kBackboneChannels, 32, 3},
    {"head.search.out", 32, kSearchChannels, 1},
    {"head.ctrl.conv", kBackboneChannels, 32, 3},
    {"head.ctrl.out", 32, kThetaLen, 1},
};

}  // namespace

Frame make_frame(int width, int height, int index) {
  Frame f;
  f.width = width;
  f.height = height;
  f.index = index;
  f.pixels = Tensor({3, height, width});
  validate_frame(f);
  return f;
}

void validate_frame(const Frame& frame) {
  if (frame.width <= 0 || frame.height <= 0 || frame.width % kDownsample != 0 ||
      frame.height % kDownsample != 0) {
    throw std::invalid_argument("frame dimensions must be positive multiples of 4, got " +
                                std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
  if (frame.pixels.shape != Shape{3, frame.height, frame.width})
    throw std::invalid_argument("frame pixel tensor must be [3,H,W], got " +
                                shape_str(frame.pixels.shape));
}

SearchTrackNet::SearchTrackNet(NetConfig cfg) : cfg_(cfg) {}

SearchTrackNet::SearchTrackNet(NetConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  Rng rng(seed);
  for (const ConvSpec& spec : kConvSpecs) {
    const int cout = spec.cout < 0 ? cfg_.num_classes : spec.cout;
    Tensor w({cout, spec.cin, spec.k, spec.k});
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.cin) * spec.k * spec.k);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    Tensor b({cout});
    if (std::string(spec.name) == "head.heat.out")
      std::fill(b.data.begin(), b.data.end(), kHeatmapBiasInit);
    register_param(std::string(spec.name) + ".weight", std::move(w));
    register_param(std::string(spec.name) + ".bias", std::move(b));
  }
}

void SearchTrackNet::register_param(const std::string& name, Tensor t) {
  params_.emplace_back(name, ad::param(std::move(t)));
}

ad::Var SearchTrackNet::parameter(const std::string& name) const {
  for (const auto& [n, v] : params_)
    if (n == name) return v;
  throw std::invalid_argument("unknown parameter: " + name);
}

std::vector<ad::Var> SearchTrackNet::parameters() const {
  std::vector<ad::Var> out;
  out.reserve(params_.size());
  for (const auto& [n, v] : params_) out.push_back(v);
  return out;
}

ad::Var SearchTrackNet::conv(const std::string& name, const ad::Var& x, int stride,
                             int pad) const {
  return ad::conv2d(x, parameter(name + ".weight"), parameter(name + ".bias"), stride, pad);
}

ad::Var SearchTrackNet::backbone_forward(const Frame& frame) const {
  validate_frame(frame);
  ad::Var x = ad::constant(frame.pixels);
  x = ad::relu(conv("backbone.conv1", x, 1, 1));
  x = ad::relu(conv("backbone.conv2", x, 2, 1));
  x = ad::relu(conv("backbone.conv3", x, 1, 1));
  return conv("backbone.conv4", x, 2, 1);
}

ad::Var SearchTrackNet::head(const std::string& name, const ad::Var& features) const {
  ad::Var h = ad::relu(conv("head." + name + ".conv", features, 1, 1));
  return conv("head." + name + ".out", h, 1, 0);
}

HeadOutputs SearchTrackNet::heads_forward(const ad::Var& features) const {
  if (features->value.ndim() != 3 || features->value.dim(0) != kBackboneChannels)
    throw std::invalid_argument("heads_forward: expected [64,H,W] backbone features, got " +
                                shape_str(features->value.shape));
  HeadOutputs out;
  out.heatmap = ad::sigmoid(head("heat", features));
  out.size_map = head("size", features);
  out.search = head("search", features);
  out.weights = head("ctrl", features);
  return out;
}

ad::Var SearchTrackNet::controller_forward(const ad::Var& features) const {
  return head("ctrl", features);
}

void SearchTrackNet::save(const std::string& path) const {
  NamedTensors tensors;
  tensors.reserve(params_.size());
  for (const auto& [name, v] : params_) tensors.emplace_back(name, v->value);
  save_checkpoint(path, tensors);
}

SearchTrackNet SearchTrackNet::load(const std::string& path) {
  NamedTensors tensors = load_checkpoint(path);
  NetConfig cfg;
  // num_classes is recovered from the heatmap head output shape.
  cfg.num_classes = 0;
  for (const auto& [name, t] : tensors)
    if (name == "head.heat.out.bias") cfg.num_classes = t.dim(0);
  if (cfg.num_classes <= 0)
    throw std::runtime_error("checkpoint missing head.heat.out.bias: " + path);

  SearchTrackNet net(cfg);
  for (auto& [name, t] : tensors) net.register_param(name, std::move(t));

  // All expected parameters must be present with consistent shapes.
  for (const ConvSpec& spec : kConvSpecs) {
    const int cout = spec.cout < 0 ? cfg.num_classes : spec.cout;
    const Tensor& w = net.parameter(std::string(spec.name) + ".weight")->value;
    if (w.shape != Shape{cout, spec.cin, spec.k, spec.k})
      throw std::runtime_error(std::string("checkpoint tensor ") + spec.name +
                               ".weight has shape " + shape_str(w.shape));
    const Tensor& b = net.parameter(std::string(spec.name) + ".bias")->value;
    if (b.shape != Shape{cout})
      throw std::runtime_error(std::string("checkpoint tensor ") + spec.name +
                               ".bias has shape " + shape_str(b.shape));
  }
  return net;
}

std::vector<Detection> extract_detections(const HeadOutputs& out, double tau_det,
                                          int max_k) {
  if (!(tau_det > 0.0 && tau_det < 1.0))
    throw std::invalid_argument("tau_det must lie in (0,1)");
  if (max_k < 1) throw std::invalid_argument("max_k must be >= 1");

  const Tensor& y = out.heatmap->value;
  const Tensor& s = out.size_map->value;
  const Tensor& theta = out.weights->value;
  const int C = y.dim(0), H = y.dim(1), W = y.dim(2);

  std::vector<Detection> all;
  for (int c = 0; c < C; ++c) {
    std::vector<Detection> cls_dets;
    for (int cy = 0; cy < H; ++cy) {
      for (int cx = 0; cx < W; ++cx) {
        const double v = y.at(c, cy, cx);
        if (v < tau_det) continue;
        bool is_peak = true;
        for (int dy = -1; dy <= 1 && is_peak; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
            if (y.at(c, ny, nx) > v) {
              is_peak = false;
              break;
            }
          }
        }
        if (!is_peak) continue;
        Detection d;
        d.x = cx;
        d.y = cy;
        d.h = s.at(0, cy, cx);
        d.w = s.at(1, cy, cx);
        d.score = v;
        d.cls = c;
        d.theta.resize(kThetaLen);
        for (int t = 0; t < kThetaLen; ++t) d.theta[static_cast<std::size_t>(t)] = theta.at(t, cy, cx);
        cls_dets.push_back(std::move(d));
      }
    }
    std::stable_sort(cls_dets.begin(), cls_dets.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    if (static_cast<int>(cls_dets.size()) > max_k) cls_dets.resize(static_cast<std::size_t>(max_k));
    for (auto& d : cls_dets) all.push_back(std::move(d));
  }
  return all;
}

std::vector<double> sample_weights(const Tensor& weight_map, double x, double y) {
  if (weight_map.ndim() != 3)
    throw std::invalid_argument("sample_weights: weight map must be [C,H,W]");
  const int C = weight_map.dim(0), H = weight_map.dim(1), W = weight_map.dim(2);
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  if (cx < 0 || cx >= W || cy < 0 || cy >= H)
    throw std::out_of_range("sample_weights: center (" + std::to_string(x) + "," +
                            std::to_string(y) + ") rounds outside the " + std::to_string(W) +
                            "x" + std::to_string(H) + " grid");
  std::vector<double> out(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) out[static_cast<std::size_t>(c)] = weight_map.at(c, cy, cx);
  return out;
}

}  // namespace stck
