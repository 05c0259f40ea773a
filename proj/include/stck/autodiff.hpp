#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "stck/tensor.hpp"

// Tape-based reverse-mode differentiation over Tensor. A forward pass builds
// a graph of shared_ptr nodes; backward() walks it once in reverse topological
// order, accumulates into leaf gradients, and releases the tape as it goes.
// Calling backward() twice on the same result is an error: the tape is gone.
//
// Gradient recording is thread-local; inference paths wrap themselves in a
// NoGradGuard and never mutate parameters, so frozen-parameter forward passes
// may run concurrently.

namespace stck::ad {

class Node;
using Var = std::shared_ptr<Node>;

class Node {
 public:
  Tensor value;
  std::vector<double> grad;      // allocated when gradients reach this node
  std::vector<double> velocity;  // SGD momentum state (leaves only)
  bool requires_grad = false;
  bool is_leaf = false;
  bool backward_done = false;
  bool grad_fresh = false;  // leaf grad populated by backward, not yet consumed

  std::vector<Var> parents;
  std::function<void(Node&)> backprop;

  void ensure_grad();
  void set_grad(std::vector<double> g);  // test/optimizer hook
};

bool grad_enabled();
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();

 private:
  bool prev_;
};

Var constant(Tensor t);
Var param(Tensor t);  // leaf with requires_grad

// Hook for fused operations defined outside this file (losses): `backprop`
// receives the result node and accumulates into its parents.
Var make_op(Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backprop);

// --- operations -----------------------------------------------------------

// Cross-correlation (no kernel flip). x:[Cin,H,W] w:[Cout,Cin,k,k] b:[Cout].
// k odd, pad >= 0, stride in {1,2}. Output [Cout,H',W'],
// H' = floor((H + 2*pad - k)/stride) + 1.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);

Var relu(const Var& x);
Var sigmoid(const Var& x);

// Channel stacking, a then b; both [C,H,W] with equal H, W.
Var concat_channels(const Var& a, const Var& b);
// Channels [c0, c1) of a [C,H,W] tensor.
Var slice_channels(const Var& x, int c0, int c1);

// Contiguous range of a 1-D tensor.
Var narrow(const Var& x, std::int64_t offset, std::int64_t len);
Var reshape(const Var& x, Shape s);
// Channel fiber of a [C,H,W] tensor at integer cell (x, y) -> [C].
Var gather_fiber(const Var& chw, int x, int y);

Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double s);
Var sum(const Var& x);  // -> [1]

// Sum of scalar vars; empty list -> constant 0.
Var add_scalars(const std::vector<Var>& xs);

// --- training -------------------------------------------------------------

void backward(const Var& loss);

// v <- momentum*v + grad; p <- p - lr*v; grads zeroed.
// Throws if any param has no populated gradient.
void sgd_step(const std::vector<Var>& params, double lr, double momentum);

}  // namespace stck::ad
