#include "hyprown/distributions.hpp"

#include <cmath>

#include "hyprown/diffgeo.hpp"
#include "hyprown/scalar_ops.hpp"

namespace hyprown::dist {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Vec softplus_vec(const Vec& raw) {
  Vec out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = scalar::softplus(raw[i]);
  }
  return out;
}

// Inverse of softplus: raw value whose softplus equals v (> 0).
double softplus_inverse(double v) {
  if (!(v > 0.0)) {
    throw ContractError("softplus_inverse: variance must be positive");
  }
  if (v > 30.0) return v;
  return std::log(std::expm1(v));
}

double gaussian_diag_logpdf(const Vec& w, const Vec& variances) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    s += std::log(variances[i]) + w[i] * w[i] / variances[i];
  }
  return -0.5 * (static_cast<double>(w.size()) * kLog2Pi + s);
}

}  // namespace

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::euclidean: return "euclidean";
    case Kind::hwn: return "hwn";
    case Kind::rown: return "rown";
  }
  return "?";
}

const char* flavor_name(Flavor f) {
  switch (f) {
    case Flavor::isotropic: return "isotropic";
    case Flavor::diagonal: return "diagonal";
    case Flavor::full: return "full";
  }
  return "?";
}

Kind parse_kind(const std::string& s) {
  if (s == "euclidean") return Kind::euclidean;
  if (s == "hwn") return Kind::hwn;
  if (s == "rown") return Kind::rown;
  throw ConfigError("unknown distribution kind '" + s +
                    "' (expected euclidean|hwn|rown)");
}

Flavor parse_flavor(const std::string& s) {
  if (s == "isotropic") return Flavor::isotropic;
  if (s == "diagonal") return Flavor::diagonal;
  if (s == "full") return Flavor::full;
  throw ConfigError("unknown covariance flavor '" + s +
                    "' (expected isotropic|diagonal|full)");
}

CovarianceSpec CovarianceSpec::isotropic(std::size_t n, double raw) {
  if (n == 0) throw DimensionError("CovarianceSpec: dim must be >= 1");
  return CovarianceSpec{Flavor::isotropic, n, Vec{raw}};
}

CovarianceSpec CovarianceSpec::diagonal(Vec raw) {
  if (raw.empty()) throw DimensionError("CovarianceSpec: dim must be >= 1");
  std::size_t n = raw.size();
  return CovarianceSpec{Flavor::diagonal, n, std::move(raw)};
}

CovarianceSpec CovarianceSpec::full(const Matrix& m) {
  if (m.rows != m.cols || m.rows == 0) {
    throw DimensionError("CovarianceSpec: full spec needs a square matrix");
  }
  return CovarianceSpec{Flavor::full, m.rows, m.a};
}

CovarianceSpec CovarianceSpec::diagonal_from_variances(const Vec& variances) {
  Vec raw(variances.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = softplus_inverse(variances[i]);
  }
  return diagonal(std::move(raw));
}

CovarianceSpec CovarianceSpec::isotropic_from_variance(std::size_t n,
                                                       double var) {
  return isotropic(n, softplus_inverse(var));
}

RealizedCovariance realize_covariance(const CovarianceSpec& spec) {
  const std::size_t n = spec.dim;
  switch (spec.flavor) {
    case Flavor::isotropic: {
      if (spec.raw.size() != 1) {
        throw DimensionError("realize_covariance: isotropic raw must be 1");
      }
      double v = scalar::softplus(spec.raw[0]);
      Matrix sigma = Matrix::identity(n);
      Matrix factor = Matrix::identity(n);
      for (std::size_t i = 0; i < n; ++i) {
        sigma(i, i) = v;
        factor(i, i) = std::sqrt(v);
      }
      return {std::move(sigma), std::move(factor)};
    }
    case Flavor::diagonal: {
      if (spec.raw.size() != n) {
        throw DimensionError("realize_covariance: diagonal raw must be n");
      }
      Vec v = softplus_vec(spec.raw);
      Matrix sigma(n, n), factor(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        sigma(i, i) = v[i];
        factor(i, i) = std::sqrt(v[i]);
      }
      return {std::move(sigma), std::move(factor)};
    }
    case Flavor::full: {
      if (spec.raw.size() != n * n) {
        throw DimensionError("realize_covariance: full raw must be n*n");
      }
      Matrix m(n, n);
      m.a = spec.raw;
      Matrix sigma = matmul(m, transpose(m));
      for (std::size_t i = 0; i < n; ++i) sigma(i, i) += kFullCovEps;
      Matrix factor = cholesky(sigma);
      return {std::move(sigma), std::move(factor)};
    }
  }
  throw StateError("realize_covariance: unreachable");
}

Matrix rown_covariance(const geo::LorentzPoint& mu, const Vec& sigma_diag) {
  const std::size_t n = mu.dim();
  if (sigma_diag.size() != n) {
    throw DimensionError("rown_covariance: sigma_diag must have length n");
  }
  for (double v : sigma_diag) {
    if (!(v > 0.0)) {
      throw ContractError("rown_covariance: sigma_diag entries must be > 0");
    }
  }
  Vec spatial = mu.spatial();
  double sn = norm2(spatial);
  if (n == 1 || sn < kOriginDirTol) {
    return Matrix::diag(sigma_diag);
  }
  for (double& v : spatial) v /= sn;
  Vec e1(n, 0.0);
  e1[0] = 1.0;
  Matrix r = geo::rotation_matrix(e1, spatial).mat;
  Matrix rd(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rd(i, j) = r(i, j) * sigma_diag[j];
  return matmul(rd, transpose(r));
}

WrappedDistribution::WrappedDistribution(Kind kind, Vec mean_params,
                                         CovarianceSpec cov)
    : kind_(kind), mean_params_(std::move(mean_params)), cov_(std::move(cov)) {
  if (mean_params_.size() != cov_.dim) {
    throw DimensionError("WrappedDistribution: mean/cov dimension mismatch");
  }
  if (kind_ == Kind::rown && cov_.flavor == Flavor::full) {
    throw ContractError(
        "WrappedDistribution: rown requires isotropic or diagonal flavor");
  }
  if (kind_ != Kind::euclidean) {
    mean_point_ = geo::wrap(geo::LorentzPoint::origin(cov_.dim), mean_params_);
  }
}

const geo::LorentzPoint& WrappedDistribution::mean_point() const {
  if (!mean_point_) {
    throw ContractError("mean_point: euclidean distribution has no "
                        "hyperbolic mean");
  }
  return *mean_point_;
}

Vec WrappedDistribution::sigma_diag() const {
  switch (cov_.flavor) {
    case Flavor::isotropic:
      return Vec(cov_.dim, scalar::softplus(cov_.raw[0]));
    case Flavor::diagonal:
      return softplus_vec(cov_.raw);
    case Flavor::full:
      throw ContractError("sigma_diag: full flavor has no diagonal form");
  }
  throw StateError("sigma_diag: unreachable");
}

Matrix WrappedDistribution::effective_covariance() const {
  if (kind_ == Kind::rown) {
    return rown_covariance(mean_point(), sigma_diag());
  }
  return realize_covariance(cov_).sigma;
}

Matrix WrappedDistribution::effective_factor() const {
  const std::size_t n = cov_.dim;
  if (kind_ != Kind::rown) return realize_covariance(cov_).factor;
  Vec sd = sigma_diag();
  Vec spatial = mean_point().spatial();
  double sn = norm2(spatial);
  Matrix factor(n, n);
  if (n == 1 || sn < kOriginDirTol) {
    for (std::size_t i = 0; i < n; ++i) factor(i, i) = std::sqrt(sd[i]);
    return factor;
  }
  for (double& v : spatial) v /= sn;
  Vec e1(n, 0.0);
  e1[0] = 1.0;
  Matrix r = geo::rotation_matrix(e1, spatial).mat;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) factor(i, j) = r(i, j) * std::sqrt(sd[j]);
  return factor;
}

std::vector<Vec> sample(const WrappedDistribution& d, Rng& rng, int count) {
  if (count < 1) throw ContractError("sample: count must be >= 1");
  const std::size_t n = d.dim();
  Matrix a = d.effective_factor();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    Vec eps = rng.normal_vec(n);
    Vec v = matvec(a, eps);
    if (d.hyperbolic()) {
      out.push_back(geo::wrap(d.mean_point(), v).coords());
    } else {
      const Vec& m = d.mean_params();
      for (std::size_t i = 0; i < n; ++i) v[i] += m[i];
      out.push_back(std::move(v));
    }
  }
  return out;
}

double log_prob(const WrappedDistribution& d, const Vec& z) {
  const std::size_t n = d.dim();
  if (d.kind() == Kind::euclidean) {
    if (z.size() != n) {
      throw DimensionError("log_prob: euclidean point must have length n");
    }
    Vec w(n);
    const Vec& m = d.mean_params();
    for (std::size_t i = 0; i < n; ++i) w[i] = z[i] - m[i];
    if (d.flavor() == Flavor::full) {
      RealizedCovariance rc = realize_covariance(d.cov_spec());
      Matrix L = cholesky(rc.sigma);
      Vec sol = cholesky_solve(L, w);
      return -0.5 * (static_cast<double>(n) * kLog2Pi + cholesky_logdet(L) +
                     dot(w, sol));
    }
    return gaussian_diag_logpdf(w, d.sigma_diag());
  }

  if (z.size() != n + 1) {
    throw DimensionError("log_prob: hyperbolic point must have length n+1");
  }
  // Validates the manifold constraint (ContractError beyond tolerance).
  geo::LorentzPoint zp = geo::LorentzPoint::from_coords(z);
  Vec v = geo::unwrap(d.mean_point(), zp);
  double r2 = dot(v, v);
  double jac =
      static_cast<double>(n - 1) * scalar::log_sinhc_sq(r2);
  double base;
  if (d.flavor() == Flavor::full) {
    RealizedCovariance rc = realize_covariance(d.cov_spec());
    Matrix L = cholesky(rc.sigma);
    Vec sol = cholesky_solve(L, v);
    base = -0.5 * (static_cast<double>(n) * kLog2Pi + cholesky_logdet(L) +
                   dot(v, sol));
  } else if (d.kind() == Kind::rown) {
    Vec spatial = d.mean_point().spatial();
    double sn = norm2(spatial);
    if (n > 1 && sn >= kOriginDirTol) {
      for (double& x : spatial) x /= sn;
      Vec e1(n, 0.0);
      e1[0] = 1.0;
      // N(v; 0, R S R^T) = N(R^T v; 0, S).
      Matrix r = geo::rotation_matrix(e1, spatial).mat;
      v = matvec(transpose(r), v);
    }
    base = gaussian_diag_logpdf(v, d.sigma_diag());
  } else {
    base = gaussian_diag_logpdf(v, d.sigma_diag());
  }
  return base - jac;
}

double kl_mc(const WrappedDistribution& q, const WrappedDistribution& p,
             int n_samples, Rng& rng) {
  if (q.dim() != p.dim()) {
    throw DimensionError("kl_mc: dimension mismatch");
  }
  if (q.hyperbolic() != p.hyperbolic()) {
    throw ContractError("kl_mc: incompatible kinds (euclidean vs hyperbolic)");
  }
  if (n_samples < 1) throw ContractError("kl_mc: n_samples must be >= 1");
  std::vector<Vec> zs = sample(q, rng, n_samples);
  double acc = 0.0;
  for (const Vec& z : zs) {
    acc += log_prob(q, z) - log_prob(p, z);
  }
  return acc / static_cast<double>(n_samples);
}

// ---------------------------------------------------------------------

std::size_t noise_cols(Flavor f, std::size_t n) {
  return f == Flavor::full ? 2 * n : n;
}

namespace {

void check_diff_dist(const DiffDist& d, const char* op) {
  if (d.dim == 0) throw DimensionError(std::string(op) + ": dim must be >= 1");
  if (d.kind == Kind::rown && d.flavor == Flavor::full) {
    throw ContractError(std::string(op) + ": rown requires isotropic or "
                                          "diagonal flavor");
  }
  if (d.mean.cols() != d.dim) {
    throw DimensionError(std::string(op) + ": mean must have n columns");
  }
  std::size_t want = d.flavor == Flavor::isotropic ? 1
                     : d.flavor == Flavor::diagonal ? d.dim
                                                    : d.dim * d.dim;
  if (d.raw_cov.cols() != want) {
    throw DimensionError(std::string(op) + ": raw_cov has wrong width");
  }
}

// v rows ~ N(0, Sigma-hat) as a differentiable function of parameters.
ad::Var noise_to_tangent(const DiffDist& d, ad::Var eps) {
  using namespace ad;
  const std::size_t n = d.dim;
  if (d.flavor == Flavor::full) {
    if (eps.cols() != 2 * n) {
      throw DimensionError("sample_rows: full flavor needs 2n noise columns");
    }
    Var e1 = slice_cols(eps, 0, n);
    Var e2 = slice_cols(eps, n, n);
    double root_eps = std::sqrt(kFullCovEps);
    if (d.raw_cov.rows() == 1) {
      // v = M e1 + sqrt(eps_reg) e2 has law N(0, M M^T + eps_reg I).
      Var m = reshape(d.raw_cov, n, n);
      return add(matmul(e1, transpose(m)), scale(e2, root_eps));
    }
    if (d.raw_cov.rows() != eps.rows()) {
      throw DimensionError("sample_rows: per-row M needs matching batch");
    }
    Var out{nullptr, 0};
    for (std::size_t i = 0; i < eps.rows(); ++i) {
      Var m = reshape(slice_rows(d.raw_cov, i, 1), n, n);
      Var vi = add(matmul(slice_rows(e1, i, 1), transpose(m)),
                   scale(slice_rows(e2, i, 1), root_eps));
      out = (i == 0) ? vi : concat_rows(out, vi);
    }
    return out;
  }
  if (eps.cols() != n) {
    throw DimensionError("sample_rows: noise needs n columns");
  }
  Var sd = vsqrt(softplus(d.raw_cov));  // std-dev rows
  Var scaled = mul(eps, sd);
  if (d.kind == Kind::rown) {
    return dgeo::rotate_rows(dgeo::unit_rows(d.mean), scaled);
  }
  return scaled;
}

// log N(w; 0, diag(softplus(raw))) per row.
ad::Var diag_logpdf_rows(ad::Var w, ad::Var raw, std::size_t n,
                         Flavor flavor) {
  using namespace ad;
  Var var = softplus(raw);
  Var quad = sum_cols(vdiv(square(w), var));  // [S,1]
  Var logdet =
      flavor == Flavor::isotropic
          ? scale(vlog(var), static_cast<double>(n))
          : sum_cols(vlog(var));
  Var c = add_scalar(add(quad, logdet), static_cast<double>(n) * kLog2Pi);
  return scale(c, -0.5);
}

}  // namespace

ad::Var sample_rows(const DiffDist& d, ad::Var eps) {
  using namespace ad;
  check_diff_dist(d, "sample_rows");
  Var v = noise_to_tangent(d, eps);
  if (d.kind == Kind::euclidean) return add(d.mean, v);
  return dgeo::wrap_rows(dgeo::lift_rows(d.mean), v);
}

ad::Var log_prob_rows(const DiffDist& d, ad::Var z) {
  using namespace ad;
  check_diff_dist(d, "log_prob_rows");
  const std::size_t n = d.dim;
  Var w{nullptr, 0};
  if (d.kind == Kind::euclidean) {
    if (z.cols() != n) {
      throw DimensionError("log_prob_rows: euclidean points need n columns");
    }
    w = sub(z, d.mean);
  } else {
    if (z.cols() != n + 1) {
      throw DimensionError("log_prob_rows: points need n+1 columns");
    }
    w = dgeo::unwrap_rows(dgeo::lift_rows(d.mean), z);
  }

  Var base{nullptr, 0};
  if (d.flavor == Flavor::full) {
    double n_log2pi = static_cast<double>(n) * kLog2Pi;
    if (d.raw_cov.rows() == 1) {
      Var m = reshape(d.raw_cov, n, n);
      Var sigma = matmul(m, transpose(m));
      Var eye = d.mean.tape->constant(
          hyprown::scale(Matrix::identity(n), kFullCovEps));
      sigma = add(sigma, eye);
      Var ld = logdet_spd(sigma);                      // [1,1]
      Var sol = solve_spd(sigma, transpose(w));        // [n,S]
      Var quad = sum_cols(mul(w, transpose(sol)));     // [S,1]
      base = scale(add_scalar(add(quad, ld), n_log2pi), -0.5);
    } else {
      if (d.raw_cov.rows() != w.rows()) {
        throw DimensionError("log_prob_rows: per-row M needs matching batch");
      }
      for (std::size_t i = 0; i < w.rows(); ++i) {
        Var m = reshape(slice_rows(d.raw_cov, i, 1), n, n);
        Var sigma = matmul(m, transpose(m));
        Var eye = d.mean.tape->constant(
            hyprown::scale(Matrix::identity(n), kFullCovEps));
        sigma = add(sigma, eye);
        Var wi = slice_rows(w, i, 1);
        Var sol = solve_spd(sigma, transpose(wi));     // [n,1]
        Var quad = sum_cols(mul(wi, transpose(sol)));  // [1,1]
        Var bi = scale(add_scalar(add(quad, logdet_spd(sigma)), n_log2pi),
                       -0.5);
        base = (i == 0) ? bi : concat_rows(base, bi);
      }
    }
  } else {
    Var aligned = w;
    if (d.kind == Kind::rown) {
      aligned = dgeo::rotate_back_rows(dgeo::unit_rows(d.mean), w);
    }
    base = diag_logpdf_rows(aligned, d.raw_cov, n, d.flavor);
  }

  if (d.kind == Kind::euclidean) return base;
  Var r2 = sum_cols(square(w));
  Var jac = scale(log_sinhc_sq(r2), static_cast<double>(n - 1));
  return sub(base, jac);
}

ad::Var kl_mc_terms(const DiffDist& q, const DiffDist& p, ad::Var eps) {
  if (q.dim != p.dim) throw DimensionError("kl_mc_terms: dimension mismatch");
  if ((q.kind == Kind::euclidean) != (p.kind == Kind::euclidean)) {
    throw ContractError("kl_mc_terms: incompatible kinds");
  }
  ad::Var z = sample_rows(q, eps);
  return ad::sub(log_prob_rows(q, z), log_prob_rows(p, z));
}

}  // namespace hyprown::dist
