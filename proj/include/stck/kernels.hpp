#pragma once

#include <cstddef>
#include <string>

// Low-level arithmetic kernels. Every kernel has a scalar reference
// implementation and, on x86-64 hosts with AVX2+FMA, a vectorized variant.
// The active variant is chosen once at startup (cpuid, overridable with the
// STCK_KERNELS environment variable: "scalar", "avx2" or "auto").
// Vector variants may reassociate sums; results can differ from the scalar
// reference in the last bits.

namespace stck::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_supported(Backend b);
// Throws std::runtime_error if the requested backend is unsupported here.
void force_backend(Backend b);
const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
// y[i] += a * x[i]
void axpy(double* y, double a, const double* x, std::size_t n);
// out[i] = max(0, x[i])
void relu(double* out, const double* x, std::size_t n);
// gx[i] += (x[i] > 0) ? gy[i] : 0
void relu_backward(double* gx, const double* x, const double* gy, std::size_t n);

namespace detail {
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*relu)(double*, const double*, std::size_t);
  void (*relu_backward)(double*, const double*, const double*, std::size_t);
};

KernelTable scalar_table();
// Returns false if this build/host cannot run AVX2 kernels.
bool avx2_table(KernelTable* out);
}  // namespace detail

}  // namespace stck::kernels
