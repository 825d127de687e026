#pragma once

#include "hyprown/common.hpp"
#include "hyprown/linalg.hpp"

namespace hyprown::geo {

// Validation tolerance for manifold / tangency / rotation invariants.
inline constexpr double kInvariantTol = 1e-9;
// Looser tolerance applied to caller-supplied tangent data before it is
// re-projected exactly onto the tangent space.
inline constexpr double kInputTol = 1e-6;

// Point on the n-dimensional hyperboloid: z in R^{n+1}, <z,z>_L = -1,
// z_0 >= 1. Immutable after construction.
class LorentzPoint {
 public:
  static LorentzPoint origin(std::size_t n);
  // Validates the invariants; throws ContractError if violated.
  static LorentzPoint from_coords(Vec coords);
  // Lifts spatial coordinates: z_0 = sqrt(1 + |s|^2) (always valid).
  static LorentzPoint from_spatial(const Vec& spatial);

  const Vec& coords() const { return c_; }
  std::size_t dim() const { return c_.size() - 1; }  // n
  double time() const { return c_[0]; }
  Vec spatial() const { return Vec(c_.begin() + 1, c_.end()); }

 private:
  explicit LorentzPoint(Vec c) : c_(std::move(c)) {}
  Vec c_;
};

// Tangent vector at a base point; <vec, base>_L = 0. Construction checks
// the supplied vector is tangent within kInputTol, then removes the
// residual base component exactly so the stored invariant holds to
// rounding error.
class TangentVector {
 public:
  TangentVector(LorentzPoint base, Vec vec);
  static TangentVector zero(const LorentzPoint& base);

  const LorentzPoint& base() const { return base_; }
  const Vec& vec() const { return v_; }
  std::size_t dim() const { return base_.dim(); }
  // sqrt(<v,v>_L); non-negative for tangents at hyperboloid points.
  double lorentz_norm() const;

 private:
  LorentzPoint base_;
  Vec v_;
};

struct PoincarePoint {
  Vec coords;  // Euclidean norm < 1
  double norm() const { return norm2(coords); }
};

struct RotationMatrix {
  Matrix mat;  // orthogonal, det +1
};

double lorentz_inner(const Vec& a, const Vec& b);

LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& u);
TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y);
TangentVector parallel_transport(const LorentzPoint& x, const LorentzPoint& y,
                                 const TangentVector& v);
LorentzPoint wrap(const LorentzPoint& mu, const Vec& v);
Vec unwrap(const LorentzPoint& mu, const LorentzPoint& z);
double distance(const LorentzPoint& x, const LorentzPoint& y);
PoincarePoint to_poincare(const LorentzPoint& z);
RotationMatrix rotation_matrix(const Vec& x, const Vec& y);
LorentzPoint geodesic_point(const LorentzPoint& x, const TangentVector& v,
                            double t);

TangentVector scale_tangent(const TangentVector& u, double t);

}  // namespace hyprown::geo
