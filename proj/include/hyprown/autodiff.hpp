#pragma once

#include <functional>

#include "hyprown/common.hpp"
#include "hyprown/linalg.hpp"

namespace hyprown::ad {

class Tape;

// Handle into a tape node. Cheap to copy; owns nothing.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const;
  std::size_t cols() const;
};

// Reverse-mode tape over dense row-major matrices. Nodes are recorded in
// topological order by construction; backward() walks the list once in
// reverse. Single-owner: a tape must not be shared across threads.
class Tape {
 public:
  // Differentiable input. Gradient is available after backward().
  Var leaf(Matrix value);
  // Non-differentiable input; backward never propagates into it.
  Var constant(Matrix value);

  // The adjoint closure receives (tape, node value, node adjoint) and
  // must accumulate into the node's inputs via accumulate(). Input
  // values are read back from the tape by id, so closures capture ids
  // and scalars only.
  using Backward =
      std::function<void(Tape&, const Matrix&, const Matrix&)>;

  // Records a node; requires-grad is the OR of the inputs' flags,
  // computed by the op wrapper.
  Var record(const char* op, Matrix value, bool requires_grad,
             Backward backward);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  Matrix& grad_ref(std::size_t id) { return nodes_[id].grad; }
  const Matrix& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const {
    return nodes_[id].requires_grad;
  }
  void accumulate(std::size_t id, const Matrix& delta);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded adjoint once.
  // loss must be 1x1. Throws StateError on a consumed tape.
  void backward(const Var& loss);

  void reset();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
    const char* op = "";
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// Elementwise binary ops broadcast [1,1], [1,C] and [R,1] operands
// against [R,C], mirroring how batched rows are combined.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var vdiv(Var a, Var b);

Var neg(Var a);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var vexp(Var a);
Var vlog(Var a);
Var vsinh(Var a);
Var vcosh(Var a);
Var vtanh(Var a);
Var vsqrt(Var a);
Var softplus(Var a);
Var relu(Var a);
Var square(Var a);
Var vacosh(Var a);
Var clamp_min(Var a, double floor);

// Guarded primitives; s-arguments are squared radii (see scalar_ops.hpp).
Var sinhc_sq(Var s);
Var cosh_sq(Var s);
Var log_sinhc_sq(Var s);
Var acosh_ratio(Var a);

Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, std::size_t r, std::size_t c);
Var concat_cols(Var a, Var b);
Var concat_rows(Var a, Var b);
Var slice_cols(Var a, std::size_t start, std::size_t len);
Var slice_rows(Var a, std::size_t start, std::size_t len);

Var sum_all(Var a);
Var mean_all(Var a);
Var sum_rows(Var a);  // [R,C] -> [1,C]
Var sum_cols(Var a);  // [R,C] -> [R,1]

// A must be symmetric positive definite (checked by Cholesky).
Var logdet_spd(Var a);
Var solve_spd(Var a, Var b);  // A^{-1} B

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }

// Optimizers. Parameters and gradients are parallel flat lists.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;
};

double global_grad_norm(const std::vector<Matrix>& grads);
// Scales gradients in place so the global norm is <= max_norm.
void clip_global_norm(std::vector<Matrix>& grads, double max_norm);
void adam_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);
void sgd_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads,
              double lr);

}  // namespace hyprown::ad
