#include "hyprown/diffgeo.hpp"

namespace hyprown::ad::dgeo {

namespace {

std::size_t point_dim(Var z, const char* op) {
  if (z.cols() < 2) {
    throw DimensionError(std::string(op) + ": point rows need >= 2 columns");
  }
  return z.cols() - 1;
}

// e1 as a [1, n] constant on the tape.
Var e1_rows(Tape& t, std::size_t n) {
  Matrix m(1, n);
  m(0, 0) = 1.0;
  return t.constant(std::move(m));
}

}  // namespace

Var origin_rows(Tape& t, std::size_t n) {
  Matrix m(1, n + 1);
  m(0, 0) = 1.0;
  return t.constant(std::move(m));
}

Var lorentz_inner_rows(Var a, Var b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("lorentz_inner_rows: column mismatch");
  }
  Var prod = mul(a, b);
  std::size_t n = prod.cols() - 1;
  Var time = slice_cols(prod, 0, 1);
  Var space = sum_cols(slice_cols(prod, 1, n));
  return sub(space, time);
}

Var lift_rows(Var m) {
  Var s = sum_cols(square(m));                    // [B,1] squared norms
  Var time = cosh_sq(s);                          // [B,1]
  Var spatial = mul(m, sinhc_sq(s));              // broadcast [B,1] over cols
  return concat_cols(time, spatial);
}

Var exp_map_rows(Var x, Var u) {
  Var s = clamp_min(lorentz_inner_rows(u, u), 0.0);
  return add(mul(x, cosh_sq(s)), mul(u, sinhc_sq(s)));
}

Var log_map_rows(Var x, Var y) {
  Var alpha = clamp_min(neg(lorentz_inner_rows(x, y)), 1.0);
  Var k = acosh_ratio(alpha);
  return mul(k, sub(y, mul(alpha, x)));
}

Var pt_rows(Var x, Var y, Var v) {
  Var alpha = neg(lorentz_inner_rows(x, y));
  Var num = sub(lorentz_inner_rows(y, v),
                mul(alpha, lorentz_inner_rows(x, v)));
  Var coeff = vdiv(num, add_scalar(alpha, 1.0));
  return add(v, mul(coeff, add(x, y)));
}

Var wrap_rows(Var mu, Var v) {
  Tape& t = *mu.tape;
  std::size_t n = point_dim(mu, "wrap_rows");
  if (v.cols() != n) {
    throw DimensionError("wrap_rows: tangent coords must have n columns");
  }
  Matrix zeros(v.rows(), 1);
  Var lifted = concat_cols(t.constant(std::move(zeros)), v);
  Var o = origin_rows(t, n);
  Var at_mu = pt_rows(o, mu, lifted);
  return exp_map_rows(mu, at_mu);
}

Var unwrap_rows(Var mu, Var z) {
  Tape& t = *mu.tape;
  std::size_t n = point_dim(mu, "unwrap_rows");
  Var u = log_map_rows(mu, z);
  Var o = origin_rows(t, n);
  Var w = pt_rows(mu, o, u);
  return slice_cols(w, 1, n);
}

Var distance_rows(Var x, Var y) {
  return vacosh(clamp_min(neg(lorentz_inner_rows(x, y)), 1.0));
}

Var to_poincare_rows(Var z) {
  std::size_t n = point_dim(z, "to_poincare_rows");
  Var time = slice_cols(z, 0, 1);
  Var spatial = slice_cols(z, 1, n);
  return vdiv(spatial, add_scalar(time, 1.0));
}

Var poincare_norm_rows(Var z) {
  Var p = to_poincare_rows(z);
  return vsqrt(clamp_min(sum_cols(square(p)), 0.0));
}

Var unit_rows(Var m) {
  Var norm = vsqrt(clamp_min(sum_cols(square(m)), kDirFloor * kDirFloor));
  return vdiv(m, norm);
}

namespace {

// K v and the scalars needed for R = I + K + K^2/(1+c) with K built from
// (e1, dir): K v = dir*v_1 - e1*<dir,v>, and
// K^2 v = dir*(c*v_1 - <dir,v>) - e1*(v_1 - c*<dir,v>).
Var rotate_impl(Var dir, Var v, bool transpose_rotation) {
  Tape& t = *dir.tape;
  if (dir.cols() != v.cols()) {
    throw DimensionError("rotate_rows: column mismatch");
  }
  std::size_t n = dir.cols();
  Var e1 = e1_rows(t, n);
  Var c = slice_cols(dir, 0, 1);                  // <dir, e1> per row
  Var v1 = slice_cols(v, 0, 1);
  Var dv = sum_cols(mul(dir, v));                 // <dir, v> per row
  Var kv = sub(mul(dir, v1), mul(e1, dv));        // K v
  Var k2v = sub(mul(dir, sub(mul(c, v1), dv)),
                mul(e1, sub(v1, mul(c, dv))));    // K^2 v
  Var denom = clamp_min(add_scalar(c, 1.0), kDirFloor);
  Var corr = vdiv(k2v, denom);
  if (transpose_rotation) return add(sub(v, kv), corr);
  return add(add(v, kv), corr);
}

}  // namespace

Var rotate_rows(Var dir, Var v) { return rotate_impl(dir, v, false); }

Var rotate_back_rows(Var dir, Var v) { return rotate_impl(dir, v, true); }

}  // namespace hyprown::ad::dgeo
