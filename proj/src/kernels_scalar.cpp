#include "stck/kernels.hpp"

namespace stck::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void relu_scalar(double* out, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(double* gx, const double* x, const double* gy,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) gx[i] += gy[i];
  }
}

}  // namespace

KernelTable scalar_table() {
  return KernelTable{dot_scalar, sum_scalar, axpy_scalar, relu_scalar,
                     relu_backward_scalar};
}

}  // namespace stck::kernels::detail
