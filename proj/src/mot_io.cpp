#include "stck/mot_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace stck {

namespace {

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("mot: cannot format number");
  return std::string(buf, ptr);
}

double parse_double(const std::string& field, int line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error("mot: line " + std::to_string(line_no) + ": bad number '" + field + "'");
  return v;
}

long long parse_int(const std::string& field, int line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error("mot: line " + std::to_string(line_no) + ": bad integer '" + field + "'");
  return v;
}

}  // namespace

std::string mot_line(const MotRecord& rec) {
  std::ostringstream os;
  os << rec.frame << "," << rec.id << "," << fmt(rec.left) << "," << fmt(rec.top) << ","
     << fmt(rec.width) << "," << fmt(rec.height) << "," << fmt(rec.conf) << ",-1,-1,-1";
  return os.str();
}

void write_mot(const std::string& path, const std::vector<MotRecord>& records) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("mot: cannot open " + path + " for writing");
  for (const MotRecord& rec : records) f << mot_line(rec) << "\n";
  if (!f) throw std::runtime_error("mot: write failed for " + path);
}

std::vector<MotRecord> read_mot(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("mot: cannot open " + path);
  std::vector<MotRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 10)
      throw std::runtime_error("mot: line " + std::to_string(line_no) + ": expected 10 fields, got " +
                               std::to_string(fields.size()));
    MotRecord rec;
    rec.frame = static_cast<int>(parse_int(fields[0], line_no));
    rec.id = parse_int(fields[1], line_no);
    rec.left = parse_double(fields[2], line_no);
    rec.top = parse_double(fields[3], line_no);
    rec.width = parse_double(fields[4], line_no);
    rec.height = parse_double(fields[5], line_no);
    rec.conf = parse_double(fields[6], line_no);
    for (int i = 7; i < 10; ++i) parse_double(fields[static_cast<std::size_t>(i)], line_no);
    if (rec.frame < 1 || rec.id < 1)
      throw std::runtime_error("mot: line " + std::to_string(line_no) + ": frame and id are 1-based");
    out.push_back(rec);
  }
  return out;
}

std::vector<MotRecord> to_records(const GroundTruth& gt) {
  std::vector<MotRecord> out;
  for (std::size_t t = 0; t < gt.frames.size(); ++t) {
    for (const GtBox& b : gt.frames[t]) {
      if (!b.visible) continue;
      MotRecord rec;
      rec.frame = static_cast<int>(t) + 1;
      rec.id = b.id;
      rec.left = b.left;
      rec.top = b.top;
      rec.width = b.width;
      rec.height = b.height;
      rec.conf = 1.0;
      out.push_back(rec);
    }
  }
  return out;
}

std::vector<MotRecord> to_records(const std::vector<FrameResult>& results) {
  std::vector<MotRecord> out;
  for (const FrameResult& fr : results) {
    for (const OutputBox& b : fr.boxes) {
      MotRecord rec;
      rec.frame = fr.frame_index;
      rec.id = b.track_id;
      rec.left = b.left;
      rec.top = b.top;
      rec.width = b.width;
      rec.height = b.height;
      rec.conf = b.score;
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace stck
