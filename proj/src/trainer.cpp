#include "stck/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stck/losses.hpp"
#include "stck/searcher.hpp"

namespace stck {

namespace {

int grid_cell(double g, int extent) {
  return std::clamp(static_cast<int>(std::lround(g)), 0, extent - 1);
}

}  // namespace

int sample_delta(Rng& rng, int max_delta) {
  return rng.uniform_int(1, std::max(1, std::min(3, max_delta)));
}

std::vector<PairObject> pair_objects_from_gt(const GroundTruth& gt, int prev_index,
                                             int cur_index) {
  auto center_of = [](const GtBox& b) {
    return motion::Vec2{px_to_grid(b.left + b.width / 2.0), px_to_grid(b.top + b.height / 2.0)};
  };
  std::vector<PairObject> objects;
  auto find = [&](std::vector<PairObject>& v, std::int64_t id) -> PairObject& {
    for (PairObject& o : v)
      if (o.id == id) return o;
    v.push_back(PairObject{});
    v.back().id = id;
    return v.back();
  };
  for (const GtBox& b : gt.frames.at(static_cast<std::size_t>(prev_index))) {
    if (!b.visible) continue;
    PairObject& o = find(objects, b.id);
    o.in_prev = true;
    o.prev_center = center_of(b);
    o.prev_h = b.height / kDownsample;
    o.prev_w = b.width / kDownsample;
  }
  for (const GtBox& b : gt.frames.at(static_cast<std::size_t>(cur_index))) {
    if (!b.visible) continue;
    PairObject& o = find(objects, b.id);
    o.in_cur = true;
    o.cur_center = center_of(b);
    o.cur_h = b.height / kDownsample;
    o.cur_w = b.width / kDownsample;
  }
  return objects;
}

double train_pair(SearchTrackNet& net, const Frame& prev, const Frame& cur,
                  const std::vector<PairObject>& objects, const TrainOptions& opt, Rng& rng) {
  const int grid_h = cur.height / kDownsample;
  const int grid_w = cur.width / kDownsample;
  const int num_classes = net.config().num_classes;

  // Previous frame feeds only the controller head.
  const ad::Var weights_prev = net.controller_forward(net.backbone_forward(prev));
  const HeadOutputs heads_cur = net.heads_forward(net.backbone_forward(cur));

  // Detection targets come from the current frame.
  Tensor heat_target({num_classes, grid_h, grid_w});
  std::vector<losses::SizeTarget> size_targets;
  int num_cur = 0;
  for (const PairObject& o : objects) {
    if (!o.in_cur) continue;
    ++num_cur;
    const int cx = grid_cell(o.cur_center.x, grid_w);
    const int cy = grid_cell(o.cur_center.y, grid_h);
    const double radius = losses::gaussian_radius(o.cur_h, o.cur_w);
    Tensor channel({grid_h, grid_w});
    const std::size_t plane = static_cast<std::size_t>(grid_h) * grid_w;
    const std::size_t off = static_cast<std::size_t>(o.cls) * plane;
    std::copy(heat_target.data.begin() + off, heat_target.data.begin() + off + plane,
              channel.data.begin());
    losses::render_gaussian(channel, cx, cy, radius);
    std::copy(channel.data.begin(), channel.data.end(), heat_target.data.begin() + off);
    size_targets.push_back({cx, cy, o.cur_h, o.cur_w});
  }

  // Search branch: dynamic weights sampled at previous centers, responses
  // against the current frame.
  std::vector<std::pair<ad::Var, Tensor>> search_pairs;
  for (const PairObject& o : objects) {
    if (!o.in_prev) continue;
    const int px = grid_cell(o.prev_center.x, grid_w);
    const int py = grid_cell(o.prev_center.y, grid_h);
    const ad::Var theta = ad::gather_fiber(weights_prev, px, py);

    const double h = o.in_cur ? o.cur_h : o.prev_h;
    const double w = o.in_cur ? o.cur_w : o.prev_w;
    const motion::Vec2 base = o.in_cur ? o.cur_center : o.prev_center;
    const double jitter_sigma = std::max(1.0, 0.05 * std::max(h, w));
    const motion::Vec2 m{base.x + rng.normal(0.0, jitter_sigma),
                         base.y + rng.normal(0.0, jitter_sigma)};

    Tensor motion_map = opt.no_motion ? Tensor({2, grid_h, grid_w})
                                      : motion::build_motion_map(m, grid_h, grid_w);
    const ad::Var f_tilde = motion::make_motion_aware(heads_cur.search, motion_map);
    ad::Var response = searcher::search(f_tilde, theta);

    Tensor target({grid_h, grid_w});
    if (o.in_cur) {
      const double radius = losses::gaussian_radius(o.cur_h, o.cur_w);
      losses::render_gaussian(target, grid_cell(o.cur_center.x, grid_w),
                              grid_cell(o.cur_center.y, grid_h), radius);
    }
    search_pairs.emplace_back(std::move(response), std::move(target));
  }

  const ad::Var loss =
      losses::total_loss(heads_cur.heatmap, heat_target, std::max(1, num_cur), search_pairs,
                         heads_cur.size_map, size_targets, opt.lambda_size);
  const double loss_value = loss->value.data[0];
  ad::backward(loss);
  if (opt.apply_step) {
    ad::sgd_step(net.parameters(), opt.lr, opt.momentum);
  }
  return loss_value;
}

double train_on_sequences(SearchTrackNet& net, const std::vector<SequenceData>& data,
                          const TrainRunConfig& cfg,
                          const std::function<void(int, double)>& on_epoch) {
  if (data.empty()) throw std::invalid_argument("train: no sequences");
  struct PairRef {
    std::size_t seq;
    int cur;
  };
  std::vector<PairRef> pairs;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const int frames = static_cast<int>(data[s].frames.size());
    for (int t = 1; t < frames; ++t) pairs.push_back({s, t});
  }
  if (pairs.empty()) throw std::invalid_argument("train: sequences too short to form pairs");

  Rng rng(cfg.seed);
  TrainOptions opt;
  opt.lr = cfg.lr;
  opt.momentum = cfg.momentum;
  opt.lambda_size = cfg.lambda_size;
  opt.no_motion = cfg.no_motion;

  double mean_loss = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the run RNG keeps epochs deterministic in the seed.
    for (std::size_t i = pairs.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.raw() % i);
      std::swap(pairs[i - 1], pairs[j]);
    }
    double total = 0.0;
    for (const PairRef& p : pairs) {
      const SequenceData& seq = data[p.seq];
      const int delta = sample_delta(rng, p.cur);
      const int prev = p.cur - delta;
      const auto objects = pair_objects_from_gt(seq.gt, prev, p.cur);
      total += train_pair(net, seq.frames[static_cast<std::size_t>(prev)],
                          seq.frames[static_cast<std::size_t>(p.cur)], objects, opt, rng);
    }
    mean_loss = total / static_cast<double>(pairs.size());
    if (on_epoch) on_epoch(epoch + 1, mean_loss);
  }
  return mean_loss;
}

}  // namespace stck
