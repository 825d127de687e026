#pragma once

#include <optional>
#include <string>

#include "hyprown/autodiff.hpp"
#include "hyprown/common.hpp"
#include "hyprown/geometry.hpp"
#include "hyprown/linalg.hpp"

namespace hyprown::dist {

enum class Kind { euclidean, hwn, rown };
enum class Flavor { isotropic, diagonal, full };

const char* kind_name(Kind k);
const char* flavor_name(Flavor f);
Kind parse_kind(const std::string& s);
Flavor parse_flavor(const std::string& s);

// Regularizer added to M M^T for the full flavor.
inline constexpr double kFullCovEps = 1e-9;
// Below this spatial-norm the RoWN rotation direction is undefined and
// the covariance is left unrotated.
inline constexpr double kOriginDirTol = 1e-12;

// Raw (unconstrained) covariance parameters. isotropic/diagonal realize
// positive variances through softplus; full realizes M M^T + eps I.
struct CovarianceSpec {
  Flavor flavor = Flavor::diagonal;
  std::size_t dim = 0;
  Vec raw;  // size 1 (isotropic), n (diagonal), n*n row-major M (full)

  static CovarianceSpec isotropic(std::size_t n, double raw);
  static CovarianceSpec diagonal(Vec raw);
  static CovarianceSpec full(const Matrix& m);
  // Raw values whose softplus equals the requested variances.
  static CovarianceSpec diagonal_from_variances(const Vec& variances);
  static CovarianceSpec isotropic_from_variance(std::size_t n, double var);
};

struct RealizedCovariance {
  Matrix sigma;   // symmetric PD
  Matrix factor;  // A with A A^T = sigma
};

RealizedCovariance realize_covariance(const CovarianceSpec& spec);

// Algorithm-1 construction: Sigma-hat = R diag(sigma_diag) R^T where R
// takes e1 to mu_spatial / ||mu_spatial||.
Matrix rown_covariance(const geo::LorentzPoint& mu, const Vec& sigma_diag);

class WrappedDistribution {
 public:
  // mean_params m in R^n; hyperbolic kinds place the mean at
  // exp_origin([0, m]), the euclidean baseline uses m directly.
  WrappedDistribution(Kind kind, Vec mean_params, CovarianceSpec cov);

  Kind kind() const { return kind_; }
  Flavor flavor() const { return cov_.flavor; }
  std::size_t dim() const { return cov_.dim; }
  bool hyperbolic() const { return kind_ != Kind::euclidean; }
  const Vec& mean_params() const { return mean_params_; }
  const geo::LorentzPoint& mean_point() const;
  const CovarianceSpec& cov_spec() const { return cov_; }

  // Positive variance diagonal (isotropic/diagonal flavors only).
  Vec sigma_diag() const;
  // Effective covariance: rotated for rown, realized otherwise.
  Matrix effective_covariance() const;
  // A with A A^T = effective covariance (rown: R diag(sqrt(sigma))).
  Matrix effective_factor() const;

 private:
  Kind kind_;
  Vec mean_params_;
  CovarianceSpec cov_;
  std::optional<geo::LorentzPoint> mean_point_;
};

// Rows of length n+1 (Lorentz coordinates) or n for euclidean. Each
// sample consumes exactly n standard normals in coordinate order.
std::vector<Vec> sample(const WrappedDistribution& d, Rng& rng, int count);

double log_prob(const WrappedDistribution& d, const Vec& z);

// (1/S) sum [log q(z_i) - log p(z_i)], z_i reparameterized from q.
double kl_mc(const WrappedDistribution& q, const WrappedDistribution& p,
             int n_samples, Rng& rng);

// ---------------------------------------------------------------------
// Differentiable path. Parameters are tape Vars batched over rows; a
// [1, k] parameter row broadcasts against [S, k] noise.

struct DiffDist {
  Kind kind;
  Flavor flavor;
  std::size_t dim = 0;  // n
  ad::Var mean;         // [B, n]
  ad::Var raw_cov;      // [B, 1] iso / [B, n] diag / [B, n*n] full
};

// Noise columns consumed per sample row (2n for full: M e1 + sqrt(eps) e2).
std::size_t noise_cols(Flavor f, std::size_t n);

// eps: [S, noise_cols] constant rows -> [S, n+1] points ([S, n] euclidean).
ad::Var sample_rows(const DiffDist& d, ad::Var eps);
// z: [S, n+1] ([S, n] euclidean) -> [S, 1] log densities.
ad::Var log_prob_rows(const DiffDist& d, ad::Var z);
// [S, 1] rows of log q(z) - log p(z) at reparameterized samples of q.
ad::Var kl_mc_terms(const DiffDist& q, const DiffDist& p, ad::Var eps);

}  // namespace hyprown::dist
