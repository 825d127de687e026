#include "hyprown/geometry.hpp"

#include <cmath>

#include "hyprown/scalar_ops.hpp"

namespace hyprown::geo {

namespace {

void check_finite(const Vec& v, const char* op) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string(op) + ": non-finite coordinate");
    }
  }
}

// z_0 recomputed from the spatial part; keeps constraint drift bounded.
Vec reproject(Vec z) {
  double s = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) s += z[i] * z[i];
  z[0] = std::sqrt(1.0 + s);
  return z;
}

Matrix outer(const Vec& a, const Vec& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

}  // namespace

double lorentz_inner(const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw DimensionError("lorentz_inner: vectors must have equal length >= 2");
  }
  double s = -a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

LorentzPoint LorentzPoint::origin(std::size_t n) {
  if (n == 0) throw DimensionError("LorentzPoint: dimension must be >= 1");
  Vec c(n + 1, 0.0);
  c[0] = 1.0;
  return LorentzPoint(std::move(c));
}

LorentzPoint LorentzPoint::from_coords(Vec coords) {
  if (coords.size() < 2) {
    throw DimensionError("LorentzPoint: need at least 2 coordinates");
  }
  check_finite(coords, "LorentzPoint::from_coords");
  double inner = lorentz_inner(coords, coords);
  if (std::fabs(inner + 1.0) > kInputTol || coords[0] < 1.0 - kInputTol) {
    throw ContractError("LorentzPoint::from_coords: <z,z>_L = " +
                        format_double(inner) + ", z0 = " +
                        format_double(coords[0]) + "; not on the hyperboloid");
  }
  return LorentzPoint(reproject(std::move(coords)));
}

LorentzPoint LorentzPoint::from_spatial(const Vec& spatial) {
  if (spatial.empty()) {
    throw DimensionError("LorentzPoint: spatial part must be non-empty");
  }
  check_finite(spatial, "LorentzPoint::from_spatial");
  Vec c(spatial.size() + 1, 0.0);
  std::copy(spatial.begin(), spatial.end(), c.begin() + 1);
  return LorentzPoint(reproject(std::move(c)));
}

TangentVector::TangentVector(LorentzPoint base, Vec vec)
    : base_(std::move(base)), v_(std::move(vec)) {
  if (v_.size() != base_.coords().size()) {
    throw DimensionError("TangentVector: vector/base length mismatch");
  }
  check_finite(v_, "TangentVector");
  double ip = lorentz_inner(v_, base_.coords());
  double scale = std::max(1.0, norm2(v_));
  if (std::fabs(ip) > kInputTol * scale) {
    throw ContractError("TangentVector: not tangent, <v,base>_L = " +
                        format_double(ip));
  }
  // <base,base>_L = -1, so adding ip * base cancels the residual exactly.
  const Vec& b = base_.coords();
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += ip * b[i];
}

TangentVector TangentVector::zero(const LorentzPoint& base) {
  return TangentVector(base, Vec(base.coords().size(), 0.0));
}

double TangentVector::lorentz_norm() const {
  double s = lorentz_inner(v_, v_);
  return std::sqrt(std::max(s, 0.0));
}

LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& u) {
  if (u.base().coords() != x.coords()) {
    throw ContractError("exp_map: tangent vector not based at x");
  }
  const Vec& xv = x.coords();
  const Vec& uv = u.vec();
  double s = lorentz_inner(uv, uv);
  if (s < 0.0) {
    if (s < -kInputTol) {
      throw ContractError("exp_map: tangent has negative squared norm " +
                          format_double(s));
    }
    s = 0.0;
  }
  double ch = scalar::cosh_sq(s);
  double shc = scalar::sinhc_sq(s);
  Vec z(xv.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = ch * xv[i] + shc * uv[i];
  return LorentzPoint::from_coords(reproject(std::move(z)));
}

TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y) {
  const Vec& xv = x.coords();
  const Vec& yv = y.coords();
  double alpha = -lorentz_inner(xv, yv);
  if (alpha < 1.0) alpha = 1.0;
  double k = scalar::acosh_ratio(alpha);
  Vec u(xv.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = k * (yv[i] - alpha * xv[i]);
  return TangentVector(x, std::move(u));
}

TangentVector parallel_transport(const LorentzPoint& x, const LorentzPoint& y,
                                 const TangentVector& v) {
  if (v.base().coords() != x.coords()) {
    throw ContractError("parallel_transport: tangent vector not based at x");
  }
  const Vec& xv = x.coords();
  const Vec& yv = y.coords();
  const Vec& vv = v.vec();
  double alpha = -lorentz_inner(xv, yv);
  if (alpha + 1.0 <= 1e-12) {
    throw ContractError("parallel_transport: degenerate configuration, alpha=" +
                        format_double(alpha));
  }
  // <y - alpha*x, v>_L = <y, v>_L since v is tangent at x.
  double coeff = lorentz_inner(yv, vv) / (alpha + 1.0);
  Vec out(vv.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = vv[i] + coeff * (xv[i] + yv[i]);
  }
  return TangentVector(y, std::move(out));
}

LorentzPoint wrap(const LorentzPoint& mu, const Vec& v) {
  if (v.size() != mu.dim()) {
    throw DimensionError("wrap: v must have length n = dim(mu)");
  }
  Vec lifted(v.size() + 1, 0.0);
  std::copy(v.begin(), v.end(), lifted.begin() + 1);
  LorentzPoint o = LorentzPoint::origin(mu.dim());
  TangentVector at_origin(o, std::move(lifted));
  TangentVector at_mu = parallel_transport(o, mu, at_origin);
  return exp_map(mu, at_mu);
}

Vec unwrap(const LorentzPoint& mu, const LorentzPoint& z) {
  TangentVector u = log_map(mu, z);
  LorentzPoint o = LorentzPoint::origin(mu.dim());
  TangentVector at_origin = parallel_transport(mu, o, u);
  const Vec& w = at_origin.vec();
  return Vec(w.begin() + 1, w.end());
}

double distance(const LorentzPoint& x, const LorentzPoint& y) {
  double alpha = -lorentz_inner(x.coords(), y.coords());
  return scalar::acosh_clamped(alpha);
}

PoincarePoint to_poincare(const LorentzPoint& z) {
  const Vec& c = z.coords();
  Vec p(c.size() - 1);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = c[i + 1] / (c[0] + 1.0);
  return PoincarePoint{std::move(p)};
}

RotationMatrix rotation_matrix(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) {
    throw DimensionError("rotation_matrix: dimension mismatch");
  }
  const std::size_t n = x.size();
  if (n == 0) throw DimensionError("rotation_matrix: empty vectors");
  if (std::fabs(norm2(x) - 1.0) > kInputTol ||
      std::fabs(norm2(y) - 1.0) > kInputTol) {
    throw ContractError("rotation_matrix: inputs must be unit vectors");
  }
  double c = dot(x, y);
  if (c <= -1.0 + kInvariantTol) {
    // 180-degree rotation in the plane spanned by x and the standard basis
    // vector least aligned with x (lowest index on ties).
    if (n == 1) {
      throw ContractError(
          "rotation_matrix: no proper 1x1 rotation maps x to -x");
    }
    std::size_t j = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(x[i]) < std::fabs(x[j])) j = i;
    }
    Vec q(n, 0.0);
    q[j] = 1.0;
    double xj = x[j];
    for (std::size_t i = 0; i < n; ++i) q[i] -= xj * x[i];
    double qn = norm2(q);
    for (double& qi : q) qi /= qn;
    Matrix r = Matrix::identity(n);
    r = sub(r, scale(outer(x, x), 2.0));
    r = sub(r, scale(outer(q, q), 2.0));
    return RotationMatrix{std::move(r)};
  }
  Matrix k = sub(outer(y, x), outer(x, y));
  Matrix r = add(add(Matrix::identity(n), k),
                 scale(matmul(k, k), 1.0 / (1.0 + c)));
  return RotationMatrix{std::move(r)};
}

LorentzPoint geodesic_point(const LorentzPoint& x, const TangentVector& v,
                            double t) {
  if (v.base().coords() != x.coords()) {
    throw ContractError("geodesic_point: tangent vector not based at x");
  }
  double c2 = std::max(lorentz_inner(v.vec(), v.vec()), 0.0);
  if (c2 == 0.0) return x;
  double c = std::sqrt(c2);
  double ch = std::cosh(c * t);
  double sh = std::sinh(c * t);
  const Vec& xv = x.coords();
  const Vec& vv = v.vec();
  Vec z(xv.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = ch * xv[i] + sh * vv[i] / c;
  }
  return LorentzPoint::from_coords(reproject(std::move(z)));
}

TangentVector scale_tangent(const TangentVector& u, double t) {
  Vec v = u.vec();
  for (double& x : v) x *= t;
  return TangentVector(u.base(), std::move(v));
}

}  // namespace hyprown::geo
