#include "stck/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stck {

namespace {

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

int read_pnm_int(std::istream& in) {
  // Skips whitespace and '#' comments.
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) throw std::runtime_error("ppm: malformed header");
  return v;
}

}  // namespace

void write_ppm(const std::string& path, const Tensor& rgb) {
  if (rgb.ndim() != 3 || rgb.dim(0) != 3)
    throw std::invalid_argument("write_ppm: image must be [3,H,W], got " + shape_str(rgb.shape));
  const int h = rgb.dim(1), w = rgb.dim(2);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("ppm: cannot open " + path + " for writing");
  f << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        row[static_cast<std::size_t>(x) * 3 + static_cast<std::size_t>(c)] = quantize(rgb.at(c, y, x));
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw std::runtime_error("ppm: write failed for " + path);
}

Tensor read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("ppm: cannot open " + path);
  char m0 = 0, m1 = 0;
  f.get(m0);
  f.get(m1);
  if (m0 != 'P' || m1 != '6') throw std::runtime_error("ppm: not a P6 file: " + path);
  const int w = read_pnm_int(f);
  const int h = read_pnm_int(f);
  const int maxval = read_pnm_int(f);
  if (maxval != 255) throw std::runtime_error("ppm: only maxval 255 supported");
  f.get();  // single whitespace after maxval
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (f.gcount() != static_cast<std::streamsize>(raw.size()))
    throw std::runtime_error("ppm: truncated pixel data in " + path);
  Tensor img({3, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) =
            raw[(static_cast<std::size_t>(y) * w + x) * 3 + static_cast<std::size_t>(c)] / 255.0;
  return img;
}

void write_pgm(const std::string& path, const Tensor& gray) {
  if (gray.ndim() != 2)
    throw std::invalid_argument("write_pgm: image must be [H,W], got " + shape_str(gray.shape));
  const int h = gray.dim(0), w = gray.dim(1);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("pgm: cannot open " + path + " for writing");
  f << "P5\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) row[static_cast<std::size_t>(x)] = quantize(gray.at(y, x));
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw std::runtime_error("pgm: write failed for " + path);
}

namespace {

void draw_box(Tensor& img, double left, double top, double width, double height,
              const std::array<double, 3>& color) {
  const int h = img.dim(1), w = img.dim(2);
  const int x0 = std::clamp(static_cast<int>(std::lround(left)), 0, w - 1);
  const int x1 = std::clamp(static_cast<int>(std::lround(left + width)) - 1, 0, w - 1);
  const int y0 = std::clamp(static_cast<int>(std::lround(top)), 0, h - 1);
  const int y1 = std::clamp(static_cast<int>(std::lround(top + height)) - 1, 0, h - 1);
  auto put = [&](int x, int y) {
    for (int c = 0; c < 3; ++c) img.at(c, y, x) = color[static_cast<std::size_t>(c)];
  };
  for (int x = x0; x <= x1; ++x) {
    put(x, y0);
    put(x, y1);
  }
  for (int y = y0; y <= y1; ++y) {
    put(x0, y);
    put(x1, y);
  }
}

}  // namespace

Tensor overlay_boxes(const Tensor& rgb, const std::vector<OutputBox>& boxes,
                     const std::vector<GtBox>* gt) {
  Tensor out = rgb;
  if (gt) {
    for (const GtBox& b : *gt)
      draw_box(out, b.left, b.top, b.width, b.height, {1.0, 1.0, 1.0});
  }
  for (const OutputBox& b : boxes) {
    const auto& color = object_palette()[static_cast<std::size_t>(b.track_id % 12)];
    draw_box(out, b.left, b.top, b.width, b.height, color);
  }
  return out;
}

}  // namespace stck
