#include "hyprown/autodiff.hpp"

#include <cmath>

#include "hyprown/scalar_ops.hpp"

namespace hyprown::ad {

namespace {

Tape& tape_of(Var a, const char* op) {
  if (!a.tape) throw ContractError(std::string(op) + ": detached Var");
  return *a.tape;
}

Tape& same_tape(Var a, Var b, const char* op) {
  Tape& t = tape_of(a, op);
  if (b.tape != &t) {
    throw ContractError(std::string(op) + ": operands on different tapes");
  }
  return t;
}

bool broadcastable(std::size_t a, std::size_t b) {
  return a == b || a == 1 || b == 1;
}

// Sums g down to shape (r, c) by collapsing broadcast dimensions.
Matrix reduce_to(const Matrix& g, std::size_t r, std::size_t c) {
  if (g.rows == r && g.cols == c) return g;
  Matrix out(r, c);
  for (std::size_t i = 0; i < g.rows; ++i) {
    std::size_t ti = (r == 1) ? 0 : i;
    for (std::size_t j = 0; j < g.cols; ++j) {
      out(ti, (c == 1) ? 0 : j) += g(i, j);
    }
  }
  return out;
}

template <typename F>
Matrix ew_apply(const char* op, const Matrix& a, const Matrix& b, F f) {
  if (!broadcastable(a.rows, b.rows) || !broadcastable(a.cols, b.cols)) {
    throw DimensionError(std::string(op) + ": shapes " +
                         std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                         " and " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols) + " not broadcastable");
  }
  std::size_t r = std::max(a.rows, b.rows);
  std::size_t c = std::max(a.cols, b.cols);
  Matrix out(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t ia = (a.rows == 1) ? 0 : i;
    std::size_t ib = (b.rows == 1) ? 0 : i;
    for (std::size_t j = 0; j < c; ++j) {
      out(i, j) = f(a(ia, (a.cols == 1) ? 0 : j), b(ib, (b.cols == 1) ? 0 : j));
    }
  }
  return out;
}

// Unary elementwise helper. df receives (x, y) and returns dy/dx.
template <typename F, typename DF>
Var unary_ew(const char* op, Var a, F f, DF df) {
  Tape& t = tape_of(a, op);
  const Matrix& x = t.value(a.id);
  Matrix v(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) v.a[i] = f(x.a[i]);
  std::size_t aid = a.id;
  bool rg = t.requires_grad(aid);
  return t.record(op, std::move(v), rg,
                  !rg ? Tape::Backward()
                      : [aid, df](Tape& tp, const Matrix& y, const Matrix& g) {
                          const Matrix& x = tp.value(aid);
                          Matrix d(g.rows, g.cols);
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            d.a[i] = g.a[i] * df(x.a[i], y.a[i]);
                          }
                          tp.accumulate(aid, d);
                        });
}

}  // namespace

const Matrix& Var::value() const {
  if (!tape) throw ContractError("Var::value: detached Var");
  return tape->value(id);
}

const Matrix& Var::grad() const {
  if (!tape) throw ContractError("Var::grad: detached Var");
  return tape->grad(id);
}

std::size_t Var::rows() const { return value().rows; }
std::size_t Var::cols() const { return value().cols; }

Var Tape::leaf(Matrix value) {
  return record("leaf", std::move(value), true, Backward());
}

Var Tape::constant(Matrix value) {
  return record("constant", std::move(value), false, Backward());
}

Var Tape::record(const char* op, Matrix value, bool requires_grad,
                 Backward backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite output");
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  n.op = op;
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

const Matrix& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    throw StateError("Tape::grad: no gradient recorded for node (op '" +
                     std::string(n.op) + "'); call backward() first");
  }
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& delta) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.grad.same_shape(delta)) {
    throw DimensionError("Tape::accumulate: adjoint shape mismatch for op '" +
                         std::string(n.op) + "'");
  }
  for (std::size_t i = 0; i < delta.size(); ++i) n.grad.a[i] += delta.a[i];
}

void Tape::backward(const Var& loss) {
  if (consumed_) {
    throw StateError("Tape::backward: tape already consumed");
  }
  if (loss.tape != this) {
    throw ContractError("Tape::backward: loss lives on another tape");
  }
  const Matrix& lv = value(loss.id);
  if (lv.rows != 1 || lv.cols != 1) {
    throw ContractError("Tape::backward: loss must be a 1x1 scalar");
  }
  for (Node& n : nodes_) {
    if (n.requires_grad) n.grad = Matrix(n.value.rows, n.value.cols);
  }
  if (!nodes_[loss.id].requires_grad) {
    // Loss does not depend on any leaf: all gradients stay zero.
    consumed_ = true;
    return;
  }
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this, n.value, n.grad);
  }
  consumed_ = true;
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  Matrix v = ew_apply("add", t.value(a.id), t.value(b.id),
                      [](double x, double y) { return x + y; });
  std::size_t aid = a.id, bid = b.id;
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "add", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, bid](Tape& tp, const Matrix&, const Matrix& g) {
              const Matrix& av = tp.value(aid);
              const Matrix& bv = tp.value(bid);
              tp.accumulate(aid, reduce_to(g, av.rows, av.cols));
              tp.accumulate(bid, reduce_to(g, bv.rows, bv.cols));
            });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b, "sub");
  Matrix v = ew_apply("sub", t.value(a.id), t.value(b.id),
                      [](double x, double y) { return x - y; });
  std::size_t aid = a.id, bid = b.id;
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "sub", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, bid](Tape& tp, const Matrix&, const Matrix& g) {
              const Matrix& av = tp.value(aid);
              const Matrix& bv = tp.value(bid);
              tp.accumulate(aid, reduce_to(g, av.rows, av.cols));
              Matrix ng = g;
              for (double& x : ng.a) x = -x;
              tp.accumulate(bid, reduce_to(ng, bv.rows, bv.cols));
            });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  Matrix v = ew_apply("mul", t.value(a.id), t.value(b.id),
                      [](double x, double y) { return x * y; });
  std::size_t aid = a.id, bid = b.id;
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "mul", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, bid](Tape& tp, const Matrix&, const Matrix& g) {
              const Matrix& av = tp.value(aid);
              const Matrix& bv = tp.value(bid);
              Matrix ga = ew_apply("mul", g, bv,
                                   [](double x, double y) { return x * y; });
              Matrix gb = ew_apply("mul", g, av,
                                   [](double x, double y) { return x * y; });
              tp.accumulate(aid, reduce_to(ga, av.rows, av.cols));
              tp.accumulate(bid, reduce_to(gb, bv.rows, bv.cols));
            });
}

Var vdiv(Var a, Var b) {
  Tape& t = same_tape(a, b, "div");
  Matrix v = ew_apply("div", t.value(a.id), t.value(b.id),
                      [](double x, double y) { return x / y; });
  std::size_t aid = a.id, bid = b.id;
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "div", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, bid](Tape& tp, const Matrix& y, const Matrix& g) {
              const Matrix& av = tp.value(aid);
              const Matrix& bv = tp.value(bid);
              Matrix ga = ew_apply("div", g, bv,
                                   [](double x, double d) { return x / d; });
              Matrix gyb = ew_apply("mul", g, y,
                                    [](double x, double q) { return x * q; });
              Matrix gb = ew_apply("div", gyb, bv,
                                   [](double x, double d) { return -x / d; });
              tp.accumulate(aid, reduce_to(ga, av.rows, av.cols));
              tp.accumulate(bid, reduce_to(gb, bv.rows, bv.cols));
            });
}

Var neg(Var a) {
  return unary_ew("neg", a, [](double x) { return -x; },
                  [](double, double) { return -1.0; });
}

Var scale(Var a, double s) {
  return unary_ew("scale", a, [s](double x) { return s * x; },
                  [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary_ew("add_scalar", a, [s](double x) { return x + s; },
                  [](double, double) { return 1.0; });
}

Var vexp(Var a) {
  return unary_ew("exp", a, [](double x) { return std::exp(x); },
                  [](double, double y) { return y; });
}

Var vlog(Var a) {
  return unary_ew("log", a, [](double x) { return std::log(x); },
                  [](double x, double) { return 1.0 / x; });
}

Var vsinh(Var a) {
  return unary_ew("sinh", a, [](double x) { return std::sinh(x); },
                  [](double x, double) { return std::cosh(x); });
}

Var vcosh(Var a) {
  return unary_ew("cosh", a, [](double x) { return std::cosh(x); },
                  [](double x, double) { return std::sinh(x); });
}

Var vtanh(Var a) {
  return unary_ew("tanh", a, [](double x) { return std::tanh(x); },
                  [](double, double y) { return 1.0 - y * y; });
}

Var vsqrt(Var a) {
  return unary_ew("sqrt", a, [](double x) { return std::sqrt(x); },
                  [](double, double y) { return 0.5 / y; });
}

Var softplus(Var a) {
  return unary_ew("softplus", a,
                  [](double x) { return scalar::softplus(x); },
                  [](double x, double) { return scalar::sigmoid(x); });
}

Var relu(Var a) {
  // Subgradient at the kink is 0.
  return unary_ew("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
                  [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var square(Var a) {
  return unary_ew("square", a, [](double x) { return x * x; },
                  [](double x, double) { return 2.0 * x; });
}

Var vacosh(Var a) {
  return unary_ew("acosh", a,
                  [](double x) { return scalar::acosh_clamped(x); },
                  [](double x, double) {
                    double d = std::max(x * x - 1.0, 1e-24);
                    return 1.0 / std::sqrt(d);
                  });
}

Var clamp_min(Var a, double floor) {
  // Subgradient 0 on the clamped region.
  return unary_ew("clamp_min", a,
                  [floor](double x) { return x < floor ? floor : x; },
                  [floor](double x, double) { return x < floor ? 0.0 : 1.0; });
}

Var sinhc_sq(Var s) {
  return unary_ew("sinhc_sq", s,
                  [](double x) { return scalar::sinhc_sq(x); },
                  [](double x, double) { return scalar::d_sinhc_sq(x); });
}

Var cosh_sq(Var s) {
  return unary_ew("cosh_sq", s,
                  [](double x) { return scalar::cosh_sq(x); },
                  [](double x, double) { return scalar::d_cosh_sq(x); });
}

Var log_sinhc_sq(Var s) {
  return unary_ew("log_sinhc_sq", s,
                  [](double x) { return scalar::log_sinhc_sq(x); },
                  [](double x, double) { return scalar::d_log_sinhc_sq(x); });
}

Var acosh_ratio(Var a) {
  return unary_ew("acosh_ratio", a,
                  [](double x) { return scalar::acosh_ratio(x); },
                  [](double x, double) { return scalar::d_acosh_ratio(x); });
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  Matrix v = hyprown::matmul(t.value(a.id), t.value(b.id));
  std::size_t aid = a.id, bid = b.id;
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "matmul", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, bid](Tape& tp, const Matrix&, const Matrix& g) {
              const Matrix& av = tp.value(aid);
              const Matrix& bv = tp.value(bid);
              if (tp.requires_grad(aid)) {
                tp.accumulate(aid, hyprown::matmul(g, hyprown::transpose(bv)));
              }
              if (tp.requires_grad(bid)) {
                tp.accumulate(bid, hyprown::matmul(hyprown::transpose(av), g));
              }
            });
}

Var transpose(Var a) {
  Tape& t = tape_of(a, "transpose");
  Matrix v = hyprown::transpose(t.value(a.id));
  std::size_t aid = a.id;
  bool rg = t.requires_grad(aid);
  return t.record("transpose", std::move(v), rg,
                  !rg ? Tape::Backward()
                      : [aid](Tape& tp, const Matrix&, const Matrix& g) {
                          tp.accumulate(aid, hyprown::transpose(g));
                        });
}

Var reshape(Var a, std::size_t r, std::size_t c) {
  Tape& t = tape_of(a, "reshape");
  const Matrix& x = t.value(a.id);
  if (r * c != x.size()) {
    throw DimensionError("reshape: element count mismatch");
  }
  Matrix v(r, c);
  v.a = x.a;
  std::size_t aid = a.id;
  std::size_t xr = x.rows, xc = x.cols;
  bool rg = t.requires_grad(aid);
  return t.record("reshape", std::move(v), rg,
                  !rg ? Tape::Backward()
                      : [aid, xr, xc](Tape& tp, const Matrix&, const Matrix& g) {
                          Matrix d(xr, xc);
                          d.a = g.a;
                          tp.accumulate(aid, d);
                        });
}

Var concat_cols(Var a, Var b) {
  Tape& t = same_tape(a, b, "concat_cols");
  const Matrix& av = t.value(a.id);
  const Matrix& bv = t.value(b.id);
  if (av.rows != bv.rows) {
    throw DimensionError("concat_cols: row count mismatch");
  }
  Matrix v(av.rows, av.cols + bv.cols);
  for (std::size_t i = 0; i < av.rows; ++i) {
    for (std::size_t j = 0; j < av.cols; ++j) v(i, j) = av(i, j);
    for (std::size_t j = 0; j < bv.cols; ++j) v(i, av.cols + j) = bv(i, j);
  }
  std::size_t aid = a.id, bid = b.id, ac = av.cols, bc = bv.cols;
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "concat_cols", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, bid, ac, bc](Tape& tp, const Matrix&, const Matrix& g) {
              Matrix ga(g.rows, ac), gb(g.rows, bc);
              for (std::size_t i = 0; i < g.rows; ++i) {
                for (std::size_t j = 0; j < ac; ++j) ga(i, j) = g(i, j);
                for (std::size_t j = 0; j < bc; ++j) gb(i, j) = g(i, ac + j);
              }
              tp.accumulate(aid, ga);
              tp.accumulate(bid, gb);
            });
}

Var concat_rows(Var a, Var b) {
  Tape& t = same_tape(a, b, "concat_rows");
  const Matrix& av = t.value(a.id);
  const Matrix& bv = t.value(b.id);
  if (av.cols != bv.cols) {
    throw DimensionError("concat_rows: column count mismatch");
  }
  Matrix v(av.rows + bv.rows, av.cols);
  std::copy(av.a.begin(), av.a.end(), v.a.begin());
  std::copy(bv.a.begin(), bv.a.end(), v.a.begin() + av.size());
  std::size_t aid = a.id, bid = b.id, ar = av.rows, asize = av.size();
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "concat_rows", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, bid, ar, asize](Tape& tp, const Matrix&, const Matrix& g) {
              Matrix ga(ar, g.cols), gb(g.rows - ar, g.cols);
              std::copy(g.a.begin(), g.a.begin() + asize, ga.a.begin());
              std::copy(g.a.begin() + asize, g.a.end(), gb.a.begin());
              tp.accumulate(aid, ga);
              tp.accumulate(bid, gb);
            });
}

Var slice_cols(Var a, std::size_t start, std::size_t len) {
  Tape& t = tape_of(a, "slice_cols");
  const Matrix& x = t.value(a.id);
  if (start + len > x.cols) throw DimensionError("slice_cols: out of range");
  Matrix v(x.rows, len);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < len; ++j) v(i, j) = x(i, start + j);
  std::size_t aid = a.id, xr = x.rows, xc = x.cols;
  bool rg = t.requires_grad(aid);
  return t.record(
      "slice_cols", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, xr, xc, start](Tape& tp, const Matrix&, const Matrix& g) {
              Matrix d(xr, xc);
              for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j)
                  d(i, start + j) = g(i, j);
              tp.accumulate(aid, d);
            });
}

Var slice_rows(Var a, std::size_t start, std::size_t len) {
  Tape& t = tape_of(a, "slice_rows");
  const Matrix& x = t.value(a.id);
  if (start + len > x.rows) throw DimensionError("slice_rows: out of range");
  Matrix v(len, x.cols);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) v(i, j) = x(start + i, j);
  std::size_t aid = a.id, xr = x.rows, xc = x.cols;
  bool rg = t.requires_grad(aid);
  return t.record(
      "slice_rows", std::move(v), rg,
      !rg ? Tape::Backward()
          : [aid, xr, xc, start](Tape& tp, const Matrix&, const Matrix& g) {
              Matrix d(xr, xc);
              for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j)
                  d(start + i, j) = g(i, j);
              tp.accumulate(aid, d);
            });
}

Var sum_all(Var a) {
  Tape& t = tape_of(a, "sum_all");
  const Matrix& x = t.value(a.id);
  double s = 0.0;
  for (double v : x.a) s += v;
  std::size_t aid = a.id, xr = x.rows, xc = x.cols;
  bool rg = t.requires_grad(aid);
  return t.record("sum_all", Matrix::scalar(s), rg,
                  !rg ? Tape::Backward()
                      : [aid, xr, xc](Tape& tp, const Matrix&, const Matrix& g) {
                          tp.accumulate(aid, Matrix(xr, xc, g.a[0]));
                        });
}

Var mean_all(Var a) {
  const Matrix& x = tape_of(a, "mean_all").value(a.id);
  if (x.size() == 0) throw DimensionError("mean_all: empty input");
  return scale(sum_all(a), 1.0 / static_cast<double>(x.size()));
}

Var sum_rows(Var a) {
  Tape& t = tape_of(a, "sum_rows");
  const Matrix& x = t.value(a.id);
  Matrix v(1, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) v(0, j) += x(i, j);
  std::size_t aid = a.id, xr = x.rows;
  bool rg = t.requires_grad(aid);
  return t.record("sum_rows", std::move(v), rg,
                  !rg ? Tape::Backward()
                      : [aid, xr](Tape& tp, const Matrix&, const Matrix& g) {
                          Matrix d(xr, g.cols);
                          for (std::size_t i = 0; i < xr; ++i)
                            for (std::size_t j = 0; j < g.cols; ++j)
                              d(i, j) = g(0, j);
                          tp.accumulate(aid, d);
                        });
}

Var sum_cols(Var a) {
  Tape& t = tape_of(a, "sum_cols");
  const Matrix& x = t.value(a.id);
  Matrix v(x.rows, 1);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) v(i, 0) += x(i, j);
  std::size_t aid = a.id, xc = x.cols;
  bool rg = t.requires_grad(aid);
  return t.record("sum_cols", std::move(v), rg,
                  !rg ? Tape::Backward()
                      : [aid, xc](Tape& tp, const Matrix&, const Matrix& g) {
                          Matrix d(g.rows, xc);
                          for (std::size_t i = 0; i < g.rows; ++i)
                            for (std::size_t j = 0; j < xc; ++j)
                              d(i, j) = g(i, 0);
                          tp.accumulate(aid, d);
                        });
}

Var logdet_spd(Var a) {
  Tape& t = tape_of(a, "logdet_spd");
  const Matrix& x = t.value(a.id);
  Matrix L = cholesky(x);
  double v = cholesky_logdet(L);
  std::size_t aid = a.id;
  bool rg = t.requires_grad(aid);
  return t.record("logdet_spd", Matrix::scalar(v), rg,
                  !rg ? Tape::Backward()
                      : [aid, L](Tape& tp, const Matrix&, const Matrix& g) {
                          Matrix inv = cholesky_inverse(L);
                          tp.accumulate(aid, hyprown::scale(inv, g.a[0]));
                        });
}

Var solve_spd(Var a, Var b) {
  Tape& t = same_tape(a, b, "solve_spd");
  const Matrix& av = t.value(a.id);
  const Matrix& bv = t.value(b.id);
  Matrix L = cholesky(av);
  Matrix x = cholesky_solve_mat(L, bv);
  std::size_t aid = a.id, bid = b.id;
  bool rg = t.requires_grad(aid) || t.requires_grad(bid);
  return t.record(
      "solve_spd", std::move(x), rg,
      !rg ? Tape::Backward()
          : [aid, bid, L](Tape& tp, const Matrix& y, const Matrix& g) {
              // x = A^{-1} b:  b_adj += A^{-1} g;  A_adj -= (A^{-1} g) x^T.
              Matrix s = cholesky_solve_mat(L, g);
              tp.accumulate(bid, s);
              if (tp.requires_grad(aid)) {
                Matrix ga = hyprown::matmul(s, hyprown::transpose(y));
                for (double& v : ga.a) v = -v;
                tp.accumulate(aid, ga);
              }
            });
}

double global_grad_norm(const std::vector<Matrix>& grads) {
  double s = 0.0;
  for (const Matrix& g : grads) {
    for (double v : g.a) s += v * v;
  }
  return std::sqrt(s);
}

void clip_global_norm(std::vector<Matrix>& grads, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw ContractError("clip_global_norm: max_norm must be positive");
  }
  double n = global_grad_norm(grads);
  if (n <= max_norm || n == 0.0) return;
  double f = max_norm / n;
  for (Matrix& g : grads) {
    for (double& v : g.a) v *= f;
  }
}

void adam_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam_step: params/grads count mismatch");
  }
  if (state.m.empty()) {
    for (const Matrix* p : params) {
      state.m.emplace_back(p->rows, p->cols);
      state.v.emplace_back(p->rows, p->cols);
    }
  }
  if (state.m.size() != params.size()) {
    throw StateError("adam_step: optimizer state size mismatch");
  }
  state.step += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    const Matrix& g = grads[k];
    if (!p.same_shape(g)) throw DimensionError("adam_step: shape mismatch");
    Matrix& m = state.m[k];
    Matrix& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.a[i] = beta1 * m.a[i] + (1.0 - beta1) * g.a[i];
      v.a[i] = beta2 * v.a[i] + (1.0 - beta2) * g.a[i] * g.a[i];
      double mhat = m.a[i] / bc1;
      double vhat = v.a[i] / bc2;
      p.a[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

void sgd_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads,
              double lr) {
  if (params.size() != grads.size()) {
    throw DimensionError("sgd_step: params/grads count mismatch");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    const Matrix& g = grads[k];
    if (!p.same_shape(g)) throw DimensionError("sgd_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) p.a[i] -= lr * g.a[i];
  }
}

}  // namespace hyprown::ad
