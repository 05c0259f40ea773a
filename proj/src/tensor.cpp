#include "stck/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stck {

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimension must be positive, got " + std::to_string(d));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape s, double fill)
    : shape(std::move(s)), data(static_cast<std::size_t>(numel(shape)), fill) {}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
  if (static_cast<std::int64_t>(data.size()) != numel(shape)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_str(shape));
  }
}

double& Tensor::at(int c, int y, int x) {
  const int H = shape[1], W = shape[2];
  return data[(static_cast<std::size_t>(c) * H + y) * W + x];
}

double Tensor::at(int c, int y, int x) const {
  const int H = shape[1], W = shape[2];
  return data[(static_cast<std::size_t>(c) * H + y) * W + x];
}

double& Tensor::at(int y, int x) {
  const int W = shape.back();
  return data[static_cast<std::size_t>(y) * W + x];
}

double Tensor::at(int y, int x) const {
  const int W = shape.back();
  return data[static_cast<std::size_t>(y) * W + x];
}

void Tensor::check_finite(const char* what) const {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string(what) + ": non-finite value");
    }
  }
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

}  // namespace stck
