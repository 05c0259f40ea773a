#include "stck/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stck::losses {

namespace {

constexpr double kClampLo = 1e-6;
constexpr double kClampHi = 1.0 - 1e-6;

// Focal loss over one prediction/target buffer. Returns the (positive) loss
// and, when grad != nullptr, writes d(loss)/d(pred) there (without any 1/N).
double focal_forward_grad(const std::vector<double>& pred, const std::vector<double>& target,
                          double* grad) {
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double raw = pred[i];
    const double y = std::clamp(raw, kClampLo, kClampHi);
    const double t = target[i];
    double dldy = 0.0;
    if (t == 1.0) {
      // Saturated prediction: the exact branch limit is 0.
      if (raw < 1.0) {
        const double omy = 1.0 - y;
        loss -= omy * omy * std::log(y);
        dldy = 2.0 * omy * std::log(y) - omy * omy / y;
      }
    } else {
      if (raw > 0.0) {
        const double w = (1.0 - t) * (1.0 - t) * (1.0 - t) * (1.0 - t);
        loss -= w * y * y * std::log(1.0 - y);
        dldy = w * (y * y / (1.0 - y) - 2.0 * y * std::log(1.0 - y));
      }
    }
    if (grad) {
      // Clamp is flat outside its range.
      grad[i] = (raw > kClampLo && raw < kClampHi) ? dldy : 0.0;
    }
  }
  return loss;
}

ad::Var focal_op(const ad::Var& pred, Tensor target, double norm) {
  if (!same_shape(pred->value.shape, target.shape))
    throw std::invalid_argument("focal loss: prediction " + shape_str(pred->value.shape) +
                                " vs target " + shape_str(target.shape));
  std::vector<double> dldy(pred->value.data.size());
  const double loss = focal_forward_grad(pred->value.data, target.data, dldy.data()) * norm;
  ad::Var pv = pred;
  auto dldy_ptr = std::make_shared<std::vector<double>>(std::move(dldy));
  return ad::make_op(Tensor({1}, {loss}), {pred}, [pv, dldy_ptr, norm](ad::Node& n) {
    if (!pv->requires_grad) return;
    pv->ensure_grad();
    const double g = n.grad[0] * norm;
    for (std::size_t i = 0; i < dldy_ptr->size(); ++i) pv->grad[i] += g * (*dldy_ptr)[i];
  });
}

}  // namespace

double gaussian_radius(double height, double width, double min_overlap) {
  if (height <= 0.0 || width <= 0.0)
    throw std::invalid_argument("gaussian_radius: size must be positive");
  if (!(min_overlap > 0.0 && min_overlap < 1.0))
    throw std::invalid_argument("gaussian_radius: min_overlap must lie in (0,1)");

  const double b1 = height + width;
  const double c1 = width * height * (1.0 - min_overlap) / (1.0 + min_overlap);
  const double r1 = (b1 + std::sqrt(b1 * b1 - 4.0 * c1)) / 2.0;

  const double a2 = 4.0;
  const double b2 = 2.0 * (height + width);
  const double c2 = (1.0 - min_overlap) * width * height;
  const double r2 = (b2 + std::sqrt(b2 * b2 - 4.0 * a2 * c2)) / 2.0;

  const double a3 = 4.0 * min_overlap;
  const double b3 = -2.0 * min_overlap * (height + width);
  const double c3 = (min_overlap - 1.0) * width * height;
  const double r3 = (b3 + std::sqrt(b3 * b3 - 4.0 * a3 * c3)) / 2.0;

  const double r = std::max(0.0, std::floor(std::min({r1, r2, r3})));
  return std::max(1.0, r);
}

void render_gaussian(Tensor& target, int cx, int cy, double radius) {
  if (target.ndim() != 2) throw std::invalid_argument("render_gaussian: target must be [H,W]");
  const int h = target.dim(0), w = target.dim(1);
  if (cx < 0 || cx >= w || cy < 0 || cy >= h)
    throw std::out_of_range("render_gaussian: center (" + std::to_string(cx) + "," +
                            std::to_string(cy) + ") outside " + std::to_string(w) + "x" +
                            std::to_string(h) + " grid");
  const double sigma = radius / 3.0;
  const double denom = 2.0 * sigma * sigma;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d2 = static_cast<double>(x - cx) * (x - cx) +
                        static_cast<double>(y - cy) * (y - cy);
      const double v = std::exp(-d2 / denom);
      double& cell = target.at(y, x);
      cell = std::max(cell, v);
    }
  }
}

ad::Var heatmap_focal_loss(const ad::Var& y, const Tensor& y_star, int num_objects) {
  if (num_objects < 1) throw std::invalid_argument("heatmap_focal_loss: N must be >= 1");
  return focal_op(y, y_star, 1.0 / static_cast<double>(num_objects));
}

ad::Var search_focal_loss(const ad::Var& r, const Tensor& r_star) {
  return focal_op(r, r_star, 1.0);
}

ad::Var search_loss(const std::vector<std::pair<ad::Var, Tensor>>& pairs) {
  std::vector<ad::Var> terms;
  terms.reserve(pairs.size());
  for (const auto& [r, r_star] : pairs) terms.push_back(search_focal_loss(r, r_star));
  return ad::add_scalars(terms);
}

ad::Var size_loss(const ad::Var& size_map, const std::vector<SizeTarget>& targets) {
  const Tensor& s = size_map->value;
  if (s.ndim() != 3 || s.dim(0) != 2)
    throw std::invalid_argument("size_loss: size map must be [2,H,W], got " + shape_str(s.shape));
  const int h = s.dim(1), w = s.dim(2);
  for (const SizeTarget& t : targets)
    if (t.cx < 0 || t.cx >= w || t.cy < 0 || t.cy >= h)
      throw std::out_of_range("size_loss: center cell outside grid");

  const double norm = 1.0 / static_cast<double>(std::max<std::size_t>(1, targets.size()));
  double loss = 0.0;
  for (const SizeTarget& t : targets)
    loss += std::abs(s.at(0, t.cy, t.cx) - t.h) + std::abs(s.at(1, t.cy, t.cx) - t.w);
  loss *= norm;

  ad::Var sv = size_map;
  auto targets_copy = std::make_shared<std::vector<SizeTarget>>(targets);
  return ad::make_op(Tensor({1}, {loss}), {size_map}, [sv, targets_copy, norm, h, w](ad::Node& n) {
    if (!sv->requires_grad) return;
    sv->ensure_grad();
    const double g = n.grad[0] * norm;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (const SizeTarget& t : *targets_copy) {
      const std::size_t off = static_cast<std::size_t>(t.cy) * w + t.cx;
      const double dh = sv->value.data[off] - t.h;
      const double dw = sv->value.data[plane + off] - t.w;
      if (dh != 0.0) sv->grad[off] += g * (dh > 0.0 ? 1.0 : -1.0);
      if (dw != 0.0) sv->grad[plane + off] += g * (dw > 0.0 ? 1.0 : -1.0);
    }
  });
}

ad::Var total_loss(const ad::Var& heatmap, const Tensor& heatmap_target, int num_objects,
                   const std::vector<std::pair<ad::Var, Tensor>>& search_pairs,
                   const ad::Var& size_map, const std::vector<SizeTarget>& size_targets,
                   double lambda_size) {
  ad::Var l = ad::add(heatmap_focal_loss(heatmap, heatmap_target, num_objects),
                      search_loss(search_pairs));
  return ad::add(l, ad::scale(size_loss(size_map, size_targets), lambda_size));
}

}  // namespace stck::losses
