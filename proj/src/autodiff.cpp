#include "stck/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "stck/kernels.hpp"

namespace stck::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void Node::ensure_grad() {
  if (grad.size() != value.data.size()) grad.assign(value.data.size(), 0.0);
}

void Node::set_grad(std::vector<double> g) {
  if (g.size() != value.data.size())
    throw std::invalid_argument("set_grad: size mismatch");
  grad = std::move(g);
  grad_fresh = true;
}

Var constant(Tensor t) {
  auto n = std::make_shared<Node>();
  n->value = std::move(t);
  n->is_leaf = true;
  return n;
}

Var param(Tensor t) {
  auto n = std::make_shared<Node>();
  n->value = std::move(t);
  n->is_leaf = true;
  n->requires_grad = true;
  return n;
}

Var make_op(Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool track = false;
  if (g_grad_enabled) {
    for (const auto& p : parents)
      if (p->requires_grad) track = true;
  }
  if (track) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return n;
}

// --- conv2d -----------------------------------------------------------------

namespace {

struct ConvDims {
  int cin, h, w, cout, k, stride, pad, ho, wo;
  std::int64_t patch;  // cin*k*k
};

ConvDims conv_check(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
                    int pad) {
  if (x.ndim() != 3)
    throw std::invalid_argument("conv2d: input must be [C,H,W], got " + shape_str(x.shape));
  if (w.ndim() != 4)
    throw std::invalid_argument("conv2d: weight must be [Cout,Cin,k,k], got " + shape_str(w.shape));
  ConvDims d;
  d.cin = x.dim(0);
  d.h = x.dim(1);
  d.w = x.dim(2);
  d.cout = w.dim(0);
  d.k = w.dim(2);
  if (w.dim(1) != d.cin)
    throw std::invalid_argument("conv2d: weight in-channels " + std::to_string(w.dim(1)) +
                                " != input channels " + std::to_string(d.cin));
  if (w.dim(3) != d.k)
    throw std::invalid_argument("conv2d: kernel must be square, got " + shape_str(w.shape));
  if (d.k % 2 == 0) throw std::invalid_argument("conv2d: kernel size must be odd, got " + std::to_string(d.k));
  if (pad < 0) throw std::invalid_argument("conv2d: pad must be >= 0");
  if (stride != 1 && stride != 2)
    throw std::invalid_argument("conv2d: stride must be 1 or 2, got " + std::to_string(stride));
  if (b.ndim() != 1 || b.dim(0) != d.cout)
    throw std::invalid_argument("conv2d: bias length " + shape_str(b.shape) +
                                " != out-channels " + std::to_string(d.cout));
  d.stride = stride;
  d.pad = pad;
  d.ho = (d.h + 2 * pad - d.k) / stride + 1;
  d.wo = (d.w + 2 * pad - d.k) / stride + 1;
  if (d.ho <= 0 || d.wo <= 0)
    throw std::invalid_argument("conv2d: empty output for input " + shape_str(x.shape));
  d.patch = static_cast<std::int64_t>(d.cin) * d.k * d.k;
  return d;
}

// Rows are output positions, columns the Cin*k*k receptive field.
std::shared_ptr<std::vector<double>> im2col(const Tensor& x, const ConvDims& d) {
  auto cols = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(d.ho) * d.wo * d.patch, 0.0);
  double* out = cols->data();
  for (int oy = 0; oy < d.ho; ++oy) {
    for (int ox = 0; ox < d.wo; ++ox) {
      double* row = out + (static_cast<std::size_t>(oy) * d.wo + ox) * d.patch;
      for (int ci = 0; ci < d.cin; ++ci) {
        const double* plane = x.data.data() + static_cast<std::size_t>(ci) * d.h * d.w;
        for (int ky = 0; ky < d.k; ++ky) {
          const int iy = oy * d.stride - d.pad + ky;
          double* dst = row + (static_cast<std::size_t>(ci) * d.k + ky) * d.k;
          if (iy < 0 || iy >= d.h) continue;  // stays zero
          const int ix0 = ox * d.stride - d.pad;
          for (int kx = 0; kx < d.k; ++kx) {
            const int ix = ix0 + kx;
            if (ix >= 0 && ix < d.w) dst[kx] = plane[static_cast<std::size_t>(iy) * d.w + ix];
          }
        }
      }
    }
  }
  return cols;
}

void col2im_add(std::vector<double>& gx, const std::vector<double>& gcols,
                const ConvDims& d) {
  for (int oy = 0; oy < d.ho; ++oy) {
    for (int ox = 0; ox < d.wo; ++ox) {
      const double* row = gcols.data() + (static_cast<std::size_t>(oy) * d.wo + ox) * d.patch;
      for (int ci = 0; ci < d.cin; ++ci) {
        double* plane = gx.data() + static_cast<std::size_t>(ci) * d.h * d.w;
        for (int ky = 0; ky < d.k; ++ky) {
          const int iy = oy * d.stride - d.pad + ky;
          if (iy < 0 || iy >= d.h) continue;
          const double* src = row + (static_cast<std::size_t>(ci) * d.k + ky) * d.k;
          const int ix0 = ox * d.stride - d.pad;
          for (int kx = 0; kx < d.k; ++kx) {
            const int ix = ix0 + kx;
            if (ix >= 0 && ix < d.w) plane[static_cast<std::size_t>(iy) * d.w + ix] += src[kx];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const ConvDims d = conv_check(x->value, w->value, b->value, stride, pad);
  auto cols = im2col(x->value, d);

  Tensor out({d.cout, d.ho, d.wo});
  const std::int64_t npos = static_cast<std::int64_t>(d.ho) * d.wo;
  for (int co = 0; co < d.cout; ++co) {
    const double* wrow = w->value.data.data() + static_cast<std::size_t>(co) * d.patch;
    const double bias = b->value.data[static_cast<std::size_t>(co)];
    double* orow = out.data.data() + static_cast<std::size_t>(co) * npos;
    for (std::int64_t o = 0; o < npos; ++o) {
      orow[o] = kernels::dot(wrow, cols->data() + o * d.patch, static_cast<std::size_t>(d.patch)) + bias;
    }
  }

  Var xv = x, wv = w, bv = b;
  return make_op(std::move(out), {x, w, b}, [d, cols, npos, xv, wv, bv](Node& n) {
    const double* gout = n.grad.data();
    if (bv->requires_grad) {
      bv->ensure_grad();
      for (int co = 0; co < d.cout; ++co)
        bv->grad[static_cast<std::size_t>(co)] +=
            kernels::sum(gout + static_cast<std::size_t>(co) * npos, static_cast<std::size_t>(npos));
    }
    if (wv->requires_grad) {
      wv->ensure_grad();
      for (int co = 0; co < d.cout; ++co) {
        double* gw = wv->grad.data() + static_cast<std::size_t>(co) * d.patch;
        const double* grow = gout + static_cast<std::size_t>(co) * npos;
        for (std::int64_t o = 0; o < npos; ++o) {
          if (grow[o] != 0.0)
            kernels::axpy(gw, grow[o], cols->data() + o * d.patch, static_cast<std::size_t>(d.patch));
        }
      }
    }
    if (xv->requires_grad) {
      xv->ensure_grad();
      std::vector<double> gcols(cols->size(), 0.0);
      for (int co = 0; co < d.cout; ++co) {
        const double* wrow = wv->value.data.data() + static_cast<std::size_t>(co) * d.patch;
        const double* grow = gout + static_cast<std::size_t>(co) * npos;
        for (std::int64_t o = 0; o < npos; ++o) {
          if (grow[o] != 0.0)
            kernels::axpy(gcols.data() + o * d.patch, grow[o], wrow, static_cast<std::size_t>(d.patch));
        }
      }
      col2im_add(xv->grad, gcols, d);
    }
  });
}

// --- elementwise ------------------------------------------------------------

Var relu(const Var& x) {
  Tensor out(x->value.shape);
  kernels::relu(out.data.data(), x->value.data.data(), out.data.size());
  Var xv = x;
  return make_op(std::move(out), {x}, [xv](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    kernels::relu_backward(xv->grad.data(), xv->value.data.data(), n.grad.data(),
                           n.grad.size());
  });
}

Var sigmoid(const Var& x) {
  Tensor out(x->value.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double v = x->value.data[i];
    if (v >= 0.0) {
      out.data[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out.data[i] = e / (1.0 + e);
    }
  }
  Var xv = x;
  return make_op(std::move(out), {x}, [xv](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      const double y = n.value.data[i];
      xv->grad[i] += n.grad[i] * y * (1.0 - y);
    }
  });
}

// --- shape ops ---------------------------------------------------------------

Var concat_channels(const Var& a, const Var& b) {
  const Tensor &ta = a->value, &tb = b->value;
  if (ta.ndim() != 3 || tb.ndim() != 3)
    throw std::invalid_argument("concat_channels: inputs must be [C,H,W]");
  if (ta.dim(1) != tb.dim(1) || ta.dim(2) != tb.dim(2))
    throw std::invalid_argument("concat_channels: H/W mismatch, " + shape_str(ta.shape) +
                                " vs " + shape_str(tb.shape));
  Tensor out({ta.dim(0) + tb.dim(0), ta.dim(1), ta.dim(2)});
  std::copy(ta.data.begin(), ta.data.end(), out.data.begin());
  std::copy(tb.data.begin(), tb.data.end(), out.data.begin() + ta.size());
  Var av = a, bv = b;
  const std::size_t na = ta.data.size();
  return make_op(std::move(out), {a, b}, [av, bv, na](Node& n) {
    if (av->requires_grad) {
      av->ensure_grad();
      for (std::size_t i = 0; i < na; ++i) av->grad[i] += n.grad[i];
    }
    if (bv->requires_grad) {
      bv->ensure_grad();
      for (std::size_t i = na; i < n.grad.size(); ++i) bv->grad[i - na] += n.grad[i];
    }
  });
}

Var slice_channels(const Var& x, int c0, int c1) {
  const Tensor& t = x->value;
  if (t.ndim() != 3) throw std::invalid_argument("slice_channels: input must be [C,H,W]");
  if (c0 < 0 || c1 > t.dim(0) || c0 >= c1)
    throw std::invalid_argument("slice_channels: bad range [" + std::to_string(c0) + "," +
                                std::to_string(c1) + ") for " + shape_str(t.shape));
  const std::size_t plane = static_cast<std::size_t>(t.dim(1)) * t.dim(2);
  Tensor out({c1 - c0, t.dim(1), t.dim(2)});
  std::copy(t.data.begin() + c0 * plane, t.data.begin() + c1 * plane, out.data.begin());
  Var xv = x;
  return make_op(std::move(out), {x}, [xv, c0, plane](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    const std::size_t off = static_cast<std::size_t>(c0) * plane;
    for (std::size_t i = 0; i < n.grad.size(); ++i) xv->grad[off + i] += n.grad[i];
  });
}

Var narrow(const Var& x, std::int64_t offset, std::int64_t len) {
  const Tensor& t = x->value;
  if (t.ndim() != 1) throw std::invalid_argument("narrow: input must be 1-D");
  if (offset < 0 || len <= 0 || offset + len > t.size())
    throw std::invalid_argument("narrow: range [" + std::to_string(offset) + "," +
                                std::to_string(offset + len) + ") out of bounds for length " +
                                std::to_string(t.size()));
  Tensor out({static_cast<int>(len)});
  std::copy(t.data.begin() + offset, t.data.begin() + offset + len, out.data.begin());
  Var xv = x;
  return make_op(std::move(out), {x}, [xv, offset](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      xv->grad[static_cast<std::size_t>(offset) + i] += n.grad[i];
  });
}

Var reshape(const Var& x, Shape s) {
  if (numel(s) != x->value.size())
    throw std::invalid_argument("reshape: cannot view " + shape_str(x->value.shape) + " as " +
                                shape_str(s));
  Tensor out(std::move(s), x->value.data);
  Var xv = x;
  return make_op(std::move(out), {x}, [xv](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) xv->grad[i] += n.grad[i];
  });
}

Var gather_fiber(const Var& chw, int x, int y) {
  const Tensor& t = chw->value;
  if (t.ndim() != 3) throw std::invalid_argument("gather_fiber: input must be [C,H,W]");
  const int C = t.dim(0), H = t.dim(1), W = t.dim(2);
  if (x < 0 || x >= W || y < 0 || y >= H)
    throw std::out_of_range("gather_fiber: cell (" + std::to_string(x) + "," + std::to_string(y) +
                            ") outside " + std::to_string(W) + "x" + std::to_string(H) + " grid");
  Tensor out({C});
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const std::size_t off = static_cast<std::size_t>(y) * W + x;
  for (int c = 0; c < C; ++c) out.data[static_cast<std::size_t>(c)] = t.data[c * plane + off];
  Var xv = chw;
  return make_op(std::move(out), {chw}, [xv, plane, off](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    for (std::size_t c = 0; c < n.grad.size(); ++c) xv->grad[c * plane + off] += n.grad[c];
  });
}

// --- arithmetic ---------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  if (!same_shape(a->value.shape, b->value.shape))
    throw std::invalid_argument("add: shape mismatch " + shape_str(a->value.shape) + " vs " +
                                shape_str(b->value.shape));
  Tensor out(a->value.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a->value.data[i] + b->value.data[i];
  Var av = a, bv = b;
  return make_op(std::move(out), {a, b}, [av, bv](Node& n) {
    for (const Var& p : {av, bv}) {
      if (!p->requires_grad) continue;
      p->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += n.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  if (!same_shape(a->value.shape, b->value.shape))
    throw std::invalid_argument("mul: shape mismatch " + shape_str(a->value.shape) + " vs " +
                                shape_str(b->value.shape));
  Tensor out(a->value.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a->value.data[i] * b->value.data[i];
  Var av = a, bv = b;
  return make_op(std::move(out), {a, b}, [av, bv](Node& n) {
    if (av->requires_grad) {
      av->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) av->grad[i] += n.grad[i] * bv->value.data[i];
    }
    if (bv->requires_grad) {
      bv->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) bv->grad[i] += n.grad[i] * av->value.data[i];
    }
  });
}

Var scale(const Var& x, double s) {
  Tensor out(x->value.shape);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = x->value.data[i] * s;
  Var xv = x;
  return make_op(std::move(out), {x}, [xv, s](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) xv->grad[i] += n.grad[i] * s;
  });
}

Var sum(const Var& x) {
  Tensor out({1});
  out.data[0] = kernels::sum(x->value.data.data(), x->value.data.size());
  Var xv = x;
  return make_op(std::move(out), {x}, [xv](Node& n) {
    if (!xv->requires_grad) return;
    xv->ensure_grad();
    const double g = n.grad[0];
    for (std::size_t i = 0; i < xv->grad.size(); ++i) xv->grad[i] += g;
  });
}

Var add_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) return constant(Tensor({1}, 0.0));
  Var acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
  return acc;
}

// --- backward / optimizer -----------------------------------------------------

void backward(const Var& loss) {
  if (loss->value.size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar, got " +
                                shape_str(loss->value.shape));
  if (loss->backward_done)
    throw std::runtime_error("backward: already called on this result; re-run forward");
  if (!loss->requires_grad)
    throw std::runtime_error("backward: loss was not produced by a recorded computation");

  // Iterative post-order DFS. The order holds owning pointers: releasing a
  // node's parent list during the sweep must not destroy nodes that still
  // await their backprop.
  std::vector<Var> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Var, std::size_t>> stack;
  stack.emplace_back(loss, 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const Var& p = node->parents[next++];
      if (p->requires_grad && !visited.count(p.get())) {
        visited.insert(p.get());
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss->ensure_grad();
  loss->grad[0] = 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = it->get();
    if (n->backprop) {
      n->ensure_grad();
      n->backprop(*n);
    }
    if (n->is_leaf) {
      n->grad_fresh = true;
    } else {
      // Release the tape behind us.
      n->backprop = nullptr;
      n->parents.clear();
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
  loss->backward_done = true;
}

void sgd_step(const std::vector<Var>& params, double lr, double momentum) {
  for (const auto& p : params) {
    if (!p->is_leaf || !p->requires_grad)
      throw std::invalid_argument("sgd_step: not a parameter node");
    if (!p->grad_fresh || p->grad.size() != p->value.data.size())
      throw std::runtime_error("sgd_step: parameter has no populated gradient");
  }
  for (const auto& p : params) {
    if (p->velocity.size() != p->value.data.size()) p->velocity.assign(p->value.data.size(), 0.0);
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      p->velocity[i] = momentum * p->velocity[i] + p->grad[i];
      p->value.data[i] -= lr * p->velocity[i];
    }
    std::fill(p->grad.begin(), p->grad.end(), 0.0);
    p->grad_fresh = false;
  }
}

}  // namespace stck::ad
