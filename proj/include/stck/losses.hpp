#pragma once

#include <utility>
#include <vector>

#include "stck/autodiff.hpp"
#include "stck/tensor.hpp"

namespace stck::losses {

// CornerNet-style radius for a box of (height, width) grid cells at the given
// minimum IoU overlap; floored, clamped to >= 1.
double gaussian_radius(double height, double width, double min_overlap = 0.7);

// target[p] <- max(target[p], exp(-|p-center|^2 / (2 sigma^2))), sigma = radius/3.
// target is [H,W]; the center cell becomes exactly 1. Center must be in-grid.
void render_gaussian(Tensor& target, int cx, int cy, double radius);

// Focal loss with alpha=2, beta=4: predictions clamped to [1e-6, 1-1e-6];
// L = -(1/N) sum[ Y*=1 : (1-Y)^2 log Y ; else : (1-Y*)^4 Y^2 log(1-Y) ].
ad::Var heatmap_focal_loss(const ad::Var& y, const Tensor& y_star, int num_objects);

// Same branches, single [H,W] map, no 1/N normalization.
ad::Var search_focal_loss(const ad::Var& r, const Tensor& r_star);

// Sum of per-object search focal losses; empty -> 0.
ad::Var search_loss(const std::vector<std::pair<ad::Var, Tensor>>& pairs);

struct SizeTarget {
  int cx = 0, cy = 0;      // grid cell
  double h = 0.0, w = 0.0; // grid cells
};

// (1/N) sum over objects of |S(center) - size|_1, S is [2,H,W] (h then w).
ad::Var size_loss(const ad::Var& size_map, const std::vector<SizeTarget>& targets);

// heatmap + search + lambda_size * size.
ad::Var total_loss(const ad::Var& heatmap, const Tensor& heatmap_target, int num_objects,
                   const std::vector<std::pair<ad::Var, Tensor>>& search_pairs,
                   const ad::Var& size_map, const std::vector<SizeTarget>& size_targets,
                   double lambda_size = 0.1);

}  // namespace stck::losses
