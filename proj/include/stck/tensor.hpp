#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace stck {

using Shape = std::vector<int>;

std::int64_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major double tensor. The plain value type used everywhere;
// gradients live in the autodiff layer, not here.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> values);

  static Tensor zeros(Shape s) { return Tensor(std::move(s), 0.0); }
  static Tensor full(Shape s, double v) { return Tensor(std::move(s), v); }

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  // [C,H,W] indexing
  double& at(int c, int y, int x);
  double at(int c, int y, int x) const;
  // [H,W] indexing
  double& at(int y, int x);
  double at(int y, int x) const;

  void check_finite(const char* what) const;
};

bool same_shape(const Shape& a, const Shape& b);

}  // namespace stck
