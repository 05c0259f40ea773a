#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "stck/motion.hpp"
#include "stck/nets.hpp"
#include "stck/searcher.hpp"
#include "stck/tensor.hpp"

namespace stck {

struct TrackerConfig {
  double tau_det = 0.4;
  double tau_assoc = 0.3;
  double gate_radius_factor = 2.0;
  int max_misses = 5;
  int max_k = 32;
  bool no_motion = false;  // zero the motion channels of the search input

  void validate() const;
};

struct Track {
  std::int64_t id = 0;
  motion::KalmanState kalman;
  std::vector<double> theta;  // last associated dynamic weights
  motion::Vec2 last_center;   // grid coords
  double h = 0.0, w = 0.0;    // grid cells
  int cls = 0;
  int misses = 0;
  int age = 1;
};

struct OutputBox {
  std::int64_t track_id = 0;
  double left = 0.0, top = 0.0, width = 0.0, height = 0.0;  // pixels
  double score = 0.0;
};

struct FrameResult {
  int frame_index = 0;
  std::vector<OutputBox> boxes;
};

// Per live track, the searcher output for the current frame.
struct SearchOutcome {
  searcher::Peak peak;
  Tensor response;  // [H,W]
};

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track idx, det idx)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

// Cost 1 - R_i(det center) gated by the Euclidean distance between track i's
// response peak and the detection center (gate = factor * max(diag, 4)) and by
// class identity; optimal assignment; matches below tau_assoc are dropped.
Association associate(const std::vector<Track>& tracks,
                      const std::vector<SearchOutcome>& searches,
                      const std::vector<Detection>& detections, const TrackerConfig& cfg);

class Tracker {
 public:
  Tracker(const SearchTrackNet& net, TrackerConfig cfg);

  // Runs detection, per-track search, association and lifecycle for one frame.
  // Frame indices must be strictly increasing. When responses_out is non-null
  // it receives (track id, response map) for every live track.
  FrameResult step(const Frame& frame,
                   std::vector<std::pair<std::int64_t, Tensor>>* responses_out = nullptr);

  // The association/lifecycle core behind step(): per-track Kalman predict,
  // search over the given feature map, assignment, update/birth/retire.
  FrameResult step_with_detections(
      int frame_index, const std::vector<Detection>& detections, const ad::Var& search_feature,
      std::vector<std::pair<std::int64_t, Tensor>>* responses_out = nullptr);

  const std::vector<Track>& tracks() const { return tracks_; }

 private:
  const SearchTrackNet& net_;
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 1;
  long long last_frame_ = std::numeric_limits<long long>::min();
};

}  // namespace stck
