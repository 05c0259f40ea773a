#include "stck/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace stck::kernels {

namespace {

struct Dispatch {
  detail::KernelTable table;
  Backend backend;
  bool avx2_available;

  Dispatch() {
    detail::KernelTable avx2;
    avx2_available = detail::avx2_table(&avx2);
    backend = avx2_available ? Backend::Avx2 : Backend::Scalar;
    if (const char* env = std::getenv("STCK_KERNELS")) {
      std::string v(env);
      if (v == "scalar") {
        backend = Backend::Scalar;
      } else if (v == "avx2") {
        if (!avx2_available)
          throw std::runtime_error("STCK_KERNELS=avx2 but AVX2/FMA unavailable");
        backend = Backend::Avx2;
      } else if (v != "auto" && !v.empty()) {
        throw std::runtime_error("unknown STCK_KERNELS value: " + v);
      }
    }
    table = backend == Backend::Avx2 ? avx2 : detail::scalar_table();
  }

  void select(Backend b) {
    if (b == Backend::Avx2) {
      detail::KernelTable avx2;
      if (!detail::avx2_table(&avx2))
        throw std::runtime_error("AVX2 kernels unsupported on this host");
      table = avx2;
    } else {
      table = detail::scalar_table();
    }
    backend = b;
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool backend_supported(Backend b) {
  return b == Backend::Scalar || dispatch().avx2_available;
}

void force_backend(Backend b) { dispatch().select(b); }

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table.dot(a, b, n);
}

double sum(const double* x, std::size_t n) { return dispatch().table.sum(x, n); }

void axpy(double* y, double a, const double* x, std::size_t n) {
  dispatch().table.axpy(y, a, x, n);
}

void relu(double* out, const double* x, std::size_t n) {
  dispatch().table.relu(out, x, n);
}

void relu_backward(double* gx, const double* x, const double* gy, std::size_t n) {
  dispatch().table.relu_backward(gx, x, gy, n);
}

}  // namespace stck::kernels
