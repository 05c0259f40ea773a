#include "stck/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stck/assignment.hpp"

namespace stck {

void TrackerConfig::validate() const {
  if (!(tau_det > 0.0 && tau_det < 1.0)) throw std::invalid_argument("tau_det must lie in (0,1)");
  if (!(tau_assoc >= 0.0 && tau_assoc <= 1.0))
    throw std::invalid_argument("tau_assoc must lie in [0,1]");
  if (gate_radius_factor <= 0.0) throw std::invalid_argument("gate_radius_factor must be > 0");
  if (max_misses < 1) throw std::invalid_argument("max_misses must be >= 1");
  if (max_k < 1) throw std::invalid_argument("max_k must be >= 1");
}

Association associate(const std::vector<Track>& tracks,
                      const std::vector<SearchOutcome>& searches,
                      const std::vector<Detection>& detections, const TrackerConfig& cfg) {
  if (tracks.size() != searches.size())
    throw std::invalid_argument("associate: tracks and searches must align");

  const std::size_t n = tracks.size(), m = detections.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(n * m, inf);
  std::vector<double> resp(n * m, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const Track& tr = tracks[i];
    const SearchOutcome& so = searches[i];
    const int h = so.response.dim(0), w = so.response.dim(1);
    const double gate =
        cfg.gate_radius_factor * std::max(std::hypot(tr.h, tr.w), 4.0);
    for (std::size_t j = 0; j < m; ++j) {
      const Detection& d = detections[j];
      if (d.cls != tr.cls) continue;
      const double dist = std::hypot(so.peak.x - d.x, so.peak.y - d.y);
      if (dist > gate) continue;
      const int cx = std::clamp(static_cast<int>(std::lround(d.x)), 0, w - 1);
      const int cy = std::clamp(static_cast<int>(std::lround(d.y)), 0, h - 1);
      const double r = so.response.at(cy, cx);
      resp[i * m + j] = r;
      cost[i * m + j] = 1.0 - r;
    }
  }

  Association out;
  std::vector<char> track_matched(n, 0), det_matched(m, 0);
  for (const auto& [i, j] : hungarian(cost, static_cast<int>(n), static_cast<int>(m))) {
    const std::size_t ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
    if (resp[ii * m + jj] < cfg.tau_assoc) continue;
    out.matches.emplace_back(ii, jj);
    track_matched[ii] = 1;
    det_matched[jj] = 1;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!track_matched[i]) out.unmatched_tracks.push_back(i);
  for (std::size_t j = 0; j < m; ++j)
    if (!det_matched[j]) out.unmatched_detections.push_back(j);
  return out;
}

Tracker::Tracker(const SearchTrackNet& net, TrackerConfig cfg) : net_(net), cfg_(cfg) {
  cfg_.validate();
}

FrameResult Tracker::step(const Frame& frame,
                          std::vector<std::pair<std::int64_t, Tensor>>* responses_out) {
  ad::NoGradGuard no_grad;
  const ad::Var features = net_.backbone_forward(frame);
  const HeadOutputs heads = net_.heads_forward(features);
  const std::vector<Detection> detections = extract_detections(heads, cfg_.tau_det, cfg_.max_k);
  return step_with_detections(frame.index, detections, heads.search, responses_out);
}

FrameResult Tracker::step_with_detections(
    int frame_index, const std::vector<Detection>& detections, const ad::Var& search_feature,
    std::vector<std::pair<std::int64_t, Tensor>>* responses_out) {
  if (frame_index <= last_frame_)
    throw std::invalid_argument("tracker: frame index must be strictly increasing (got " +
                                std::to_string(frame_index) + " after " +
                                std::to_string(last_frame_) + ")");
  last_frame_ = frame_index;
  for (Track& tr : tracks_) tr.age += 1;

  ad::NoGradGuard no_grad;
  const int grid_h = search_feature->value.dim(1);
  const int grid_w = search_feature->value.dim(2);
  const Tensor zero_motion({2, grid_h, grid_w});

  // Predict each track and search for it in the current frame.
  std::vector<SearchOutcome> searches;
  searches.reserve(tracks_.size());
  for (Track& tr : tracks_) {
    auto [state, m] = motion::kf_predict(tr.kalman);
    tr.kalman = state;
    const Tensor motion_map =
        cfg_.no_motion ? zero_motion : motion::build_motion_map(m, grid_h, grid_w);
    const ad::Var f_tilde = motion::make_motion_aware(search_feature, motion_map);
    const ad::Var theta = ad::constant(Tensor({kThetaLen}, tr.theta));
    SearchOutcome so;
    so.response = searcher::search(f_tilde, theta)->value;
    so.peak = searcher::find_peak(so.response);
    searches.push_back(std::move(so));
  }
  if (responses_out) {
    responses_out->clear();
    for (std::size_t i = 0; i < tracks_.size(); ++i)
      responses_out->emplace_back(tracks_[i].id, searches[i].response);
  }

  const Association assoc = associate(tracks_, searches, detections, cfg_);

  std::vector<std::size_t> emit;  // track indices to report this frame
  for (const auto& [ti, dj] : assoc.matches) {
    Track& tr = tracks_[ti];
    const Detection& d = detections[dj];
    tr.kalman = motion::kf_update(tr.kalman, {d.x, d.y});
    tr.theta = d.theta;
    tr.last_center = {d.x, d.y};
    tr.h = d.h;
    tr.w = d.w;
    tr.misses = 0;
    emit.push_back(ti);
  }
  for (std::size_t ti : assoc.unmatched_tracks) tracks_[ti].misses += 1;

  // Births: unmatched detections spawn fresh ids in score-descending order
  // (detections are already sorted by score within a class).
  std::vector<std::pair<std::size_t, const Detection*>> birth_boxes;
  for (std::size_t dj : assoc.unmatched_detections) {
    const Detection& d = detections[dj];
    if (d.score < cfg_.tau_det) continue;
    Track tr;
    tr.id = next_id_++;
    tr.kalman = motion::kf_init({d.x, d.y});
    tr.theta = d.theta;
    tr.last_center = {d.x, d.y};
    tr.h = d.h;
    tr.w = d.w;
    tr.cls = d.cls;
    tracks_.push_back(std::move(tr));
    birth_boxes.emplace_back(tracks_.size() - 1, &d);
  }

  FrameResult result;
  result.frame_index = frame_index;
  auto emit_box = [&](const Track& tr, const Detection& d) {
    OutputBox box;
    box.track_id = tr.id;
    const double cx = grid_to_px(d.x), cy = grid_to_px(d.y);
    box.width = d.w * kDownsample;
    box.height = d.h * kDownsample;
    box.left = cx - box.width / 2.0;
    box.top = cy - box.height / 2.0;
    box.score = d.score;
    result.boxes.push_back(box);
  };
  for (const auto& [ti, dj] : assoc.matches) emit_box(tracks_[ti], detections[dj]);
  for (const auto& [ti, d] : birth_boxes) emit_box(tracks_[ti], *d);
  std::sort(result.boxes.begin(), result.boxes.end(),
            [](const OutputBox& a, const OutputBox& b) { return a.track_id < b.track_id; });

  // Retire tracks that missed too often.
  std::erase_if(tracks_, [this](const Track& tr) { return tr.misses >= cfg_.max_misses; });
  return result;
}

}  // namespace stck
