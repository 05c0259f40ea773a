#include "stck/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "stck/assignment.hpp"

namespace stck {

double box_iou(const MotRecord& a, const MotRecord& b) {
  const double x0 = std::max(a.left, b.left);
  const double y0 = std::max(a.top, b.top);
  const double x1 = std::min(a.left + a.width, b.left + b.width);
  const double y1 = std::min(a.top + a.height, b.top + b.height);
  const double inter = std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

// Optimal bijection between gt ids and track ids maximizing the summed pair
// counts; returns the achieved total. Exhaustive-search-verified in tests.
std::int64_t best_identity_overlap(const std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t>& counts) {
  std::vector<std::int64_t> gt_ids, tr_ids;
  for (const auto& [key, n] : counts) {
    if (std::find(gt_ids.begin(), gt_ids.end(), key.first) == gt_ids.end())
      gt_ids.push_back(key.first);
    if (std::find(tr_ids.begin(), tr_ids.end(), key.second) == tr_ids.end())
      tr_ids.push_back(key.second);
  }
  if (gt_ids.empty() || tr_ids.empty()) return 0;
  const int n = static_cast<int>(gt_ids.size()), m = static_cast<int>(tr_ids.size());
  std::vector<double> cost(static_cast<std::size_t>(n) * m, 0.0);
  for (const auto& [key, cnt] : counts) {
    const auto gi = std::find(gt_ids.begin(), gt_ids.end(), key.first) - gt_ids.begin();
    const auto ti = std::find(tr_ids.begin(), tr_ids.end(), key.second) - tr_ids.begin();
    cost[static_cast<std::size_t>(gi) * m + static_cast<std::size_t>(ti)] =
        -static_cast<double>(cnt);
  }
  std::int64_t total = 0;
  for (const auto& [i, j] : hungarian(cost, n, m)) {
    const auto it = counts.find({gt_ids[static_cast<std::size_t>(i)], tr_ids[static_cast<std::size_t>(j)]});
    if (it != counts.end()) total += it->second;
  }
  return total;
}

}  // namespace

MetricReport evaluate(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& results,
                      double iou_threshold) {
  int max_frame = 0;
  for (const MotRecord& r : gt) max_frame = std::max(max_frame, r.frame);
  for (const MotRecord& r : results) {
    if (r.frame < 1 || r.frame > max_frame)
      throw std::invalid_argument("evaluate: result frame " + std::to_string(r.frame) +
                                  " outside ground-truth range [1," + std::to_string(max_frame) + "]");
  }

  std::vector<std::vector<const MotRecord*>> gt_by_frame(static_cast<std::size_t>(max_frame) + 1);
  std::vector<std::vector<const MotRecord*>> res_by_frame(static_cast<std::size_t>(max_frame) + 1);
  for (const MotRecord& r : gt) gt_by_frame[static_cast<std::size_t>(r.frame)].push_back(&r);
  for (const MotRecord& r : results) res_by_frame[static_cast<std::size_t>(r.frame)].push_back(&r);

  std::int64_t tp = 0, fp = 0, fn = 0, idsw = 0;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> tp_pair_counts;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> iou_pair_counts;
  std::map<std::int64_t, std::int64_t> last_matched_id;  // gt id -> track id

  for (int f = 1; f <= max_frame; ++f) {
    const auto& gts = gt_by_frame[static_cast<std::size_t>(f)];
    const auto& dets = res_by_frame[static_cast<std::size_t>(f)];
    const int n = static_cast<int>(gts.size()), m = static_cast<int>(dets.size());

    // Frame-wise id correspondences for IDF1 (independent of matching).
    for (const MotRecord* g : gts)
      for (const MotRecord* d : dets)
        if (box_iou(*g, *d) >= iou_threshold) iou_pair_counts[{g->id, d->id}] += 1;

    std::vector<double> cost(static_cast<std::size_t>(n) * m,
                             std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double iou = box_iou(*gts[static_cast<std::size_t>(i)], *dets[static_cast<std::size_t>(j)]);
        if (iou >= iou_threshold) cost[static_cast<std::size_t>(i) * m + j] = 1.0 - iou;
      }
    }
    const auto matches = hungarian(cost, n, m);
    tp += static_cast<std::int64_t>(matches.size());
    fn += n - static_cast<std::int64_t>(matches.size());
    fp += m - static_cast<std::int64_t>(matches.size());
    for (const auto& [i, j] : matches) {
      const std::int64_t gid = gts[static_cast<std::size_t>(i)]->id;
      const std::int64_t did = dets[static_cast<std::size_t>(j)]->id;
      tp_pair_counts[{gid, did}] += 1;
      const auto it = last_matched_id.find(gid);
      if (it != last_matched_id.end() && it->second != did) idsw += 1;
      last_matched_id[gid] = did;
    }
  }

  MetricReport rep;
  rep.fp = fp;
  rep.fn = fn;
  rep.idsw = idsw;

  const std::int64_t total_gt = static_cast<std::int64_t>(gt.size());
  const std::int64_t total_res = static_cast<std::int64_t>(results.size());
  rep.mota = total_gt > 0 ? 1.0 - static_cast<double>(fp + fn + idsw) / static_cast<double>(total_gt)
                          : 1.0;

  rep.deta = (tp + fp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp + fn) : 0.0;

  const std::int64_t consistent = best_identity_overlap(tp_pair_counts);
  rep.assa = tp > 0 ? static_cast<double>(consistent) / static_cast<double>(tp) : 0.0;
  rep.hota = std::sqrt(rep.deta * rep.assa);

  const std::int64_t idtp = best_identity_overlap(iou_pair_counts);
  const std::int64_t idfp = total_res - idtp;
  const std::int64_t idfn = total_gt - idtp;
  rep.idf1 = (2 * idtp + idfp + idfn) > 0
                 ? 2.0 * static_cast<double>(idtp) / static_cast<double>(2 * idtp + idfp + idfn)
                 : 1.0;
  return rep;
}

std::string report_to_json(const MetricReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "{\n"
     << "  \"mota\": " << r.mota << ",\n"
     << "  \"idf1\": " << r.idf1 << ",\n"
     << "  \"idsw\": " << r.idsw << ",\n"
     << "  \"fp\": " << r.fp << ",\n"
     << "  \"fn\": " << r.fn << ",\n"
     << "  \"hota_05\": " << r.hota << ",\n"
     << "  \"deta_05\": " << r.deta << ",\n"
     << "  \"assa_05\": " << r.assa << "\n"
     << "}\n";
  return os.str();
}

}  // namespace stck
