#pragma once

#include <string>
#include <vector>

#include "stck/scenegen.hpp"
#include "stck/tensor.hpp"
#include "stck/tracker.hpp"

namespace stck {

// P6, maxval 255; values clamped to [0,1] and rounded.
void write_ppm(const std::string& path, const Tensor& rgb /*[3,H,W]*/);
Tensor read_ppm(const std::string& path);

// P5, maxval 255, value = round(255 * v).
void write_pgm(const std::string& path, const Tensor& gray /*[H,W]*/);

// 1-px box outlines; track color = palette[id % 12], ground truth drawn white.
Tensor overlay_boxes(const Tensor& rgb, const std::vector<OutputBox>& boxes,
                     const std::vector<GtBox>* gt);

}  // namespace stck
