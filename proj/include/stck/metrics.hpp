#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stck/mot_io.hpp"

namespace stck {

// Bounding-box tracking metrics at a single IoU threshold (alpha = 0.5 by
// default; reported as HOTA@0.5 / DetA@0.5 / AssA@0.5 throughout).
struct MetricReport {
  double mota = 0.0;
  double idf1 = 0.0;
  double hota = 0.0;  // sqrt(deta * assa)
  double deta = 0.0;
  double assa = 0.0;
  std::int64_t idsw = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

// Per-frame optimal matching on IoU >= alpha; MOTA = 1 - (FP+FN+IDSW)/GT;
// IDF1 from the optimal global identity bijection; DetA = TP/(TP+FP+FN);
// AssA = fraction of true positives whose (gt id, track id) pair lies in the
// optimal global identity bijection; HOTA = sqrt(DetA * AssA).
// Result frames must lie within the ground-truth frame range.
MetricReport evaluate(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& results,
                      double iou_threshold = 0.5);

double box_iou(const MotRecord& a, const MotRecord& b);

std::string report_to_json(const MetricReport& report);

}  // namespace stck
