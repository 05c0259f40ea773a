#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stck/motion.hpp"
#include "stck/nets.hpp"
#include "stck/rng.hpp"
#include "stck/scenegen.hpp"

namespace stck {

// Ground truth for one object across a training pair; coordinates in the
// output grid.
struct PairObject {
  std::int64_t id = 0;
  bool in_prev = false, in_cur = false;
  motion::Vec2 prev_center, cur_center;
  double prev_h = 0.0, prev_w = 0.0;  // grid cells
  double cur_h = 0.0, cur_w = 0.0;
  int cls = 0;
};

struct TrainOptions {
  double lr = 0.05;
  double momentum = 0.9;
  double lambda_size = 0.1;
  bool no_motion = false;
  bool apply_step = true;  // leave gradients in place when false
};

// Two-frame training step: dynamic weights from the previous frame, search
// feature and all loss targets from the current one. The motion map center is
// the current ground-truth center plus Gaussian jitter emulating filter error
// (sigma = max(1, 0.05 * max(h, w))). Returns the loss value.
double train_pair(SearchTrackNet& net, const Frame& prev, const Frame& cur,
                  const std::vector<PairObject>& objects, const TrainOptions& opt, Rng& rng);

// delta between training frames, uniform over {1,2,3} (clamped by max_delta).
int sample_delta(Rng& rng, int max_delta = 3);

struct SequenceData {
  std::vector<Frame> frames;
  GroundTruth gt;
};

struct TrainRunConfig {
  int epochs = 4;
  double lr = 0.05;
  double momentum = 0.9;
  double lambda_size = 0.1;
  std::uint64_t seed = 1;
  bool no_motion = false;
};

std::vector<PairObject> pair_objects_from_gt(const GroundTruth& gt, int prev_index,
                                             int cur_index);

// Epochs over all (t - delta, t) pairs of every sequence, shuffled per epoch.
// Returns the mean loss of the final epoch.
double train_on_sequences(SearchTrackNet& net, const std::vector<SequenceData>& data,
                          const TrainRunConfig& cfg,
                          const std::function<void(int, double)>& on_epoch = {});

}  // namespace stck
