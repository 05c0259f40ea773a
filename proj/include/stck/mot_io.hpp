#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stck/scenegen.hpp"
#include "stck/tracker.hpp"

namespace stck {

// One CSV row: "frame,id,bb_left,bb_top,bb_width,bb_height,conf,-1,-1,-1".
// frame and id are 1-based; box in pixels; conf in [0,1].
struct MotRecord {
  int frame = 0;
  std::int64_t id = 0;
  double left = 0.0, top = 0.0, width = 0.0, height = 0.0;
  double conf = 1.0;
};

std::string mot_line(const MotRecord& rec);
void write_mot(const std::string& path, const std::vector<MotRecord>& records);
// Strict inverse of write_mot; malformed lines raise with their line number.
std::vector<MotRecord> read_mot(const std::string& path);

// Visible boxes only, conf 1.
std::vector<MotRecord> to_records(const GroundTruth& gt);
std::vector<MotRecord> to_records(const std::vector<FrameResult>& results);

}  // namespace stck
