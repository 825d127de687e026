#pragma once

#include <optional>
#include <string>
#include <unordered_map>

#include "hyprown/common.hpp"
#include "hyprown/datasets.hpp"
#include "hyprown/distributions.hpp"
#include "hyprown/linalg.hpp"

namespace hyprown::eval {

// Worker count for the pairwise metric kernels: OpenMP's default capped
// by the HYPROWN_THREADS environment variable. Everything else in the
// library is single-threaded.
int metric_threads();

double pearson(const Vec& a, const Vec& b);

struct TreeCorrelations {
  double r_distance = 0.0;
  double r_depth = 0.0;
  std::size_t n_pairs = 0;
};

// latents: one row per test sample, in dataset order of the test split —
// Lorentz coordinates [T, d+1] for hyperbolic kinds, [T, d] euclidean.
// Pairs are subsampled (seeded) when they exceed max_pairs.
TreeCorrelations tree_correlations(const Matrix& latents, bool hyperbolic,
                                   const data::TreeDataset& ds,
                                   std::size_t max_pairs = 2000000,
                                   std::uint64_t subsample_seed = 0);
// Single-threaded reference implementation kept for equivalence tests
// and the kernel benchmark.
TreeCorrelations tree_correlations_serial(const Matrix& latents,
                                          bool hyperbolic,
                                          const data::TreeDataset& ds,
                                          std::size_t max_pairs = 2000000,
                                          std::uint64_t subsample_seed = 0);

struct RankResult {
  double mean_rank = 0.0;
  double map = 0.0;
  std::size_t n_edges = 0;
};

// means: [V, n] mean parameter rows (lifted internally for hyperbolic).
// For each positive (s,t), rank among {t' : s is unrelated to t'} by
// distance from s, ties counted optimistically; AP per source.
RankResult rank_metrics(const Matrix& means, bool hyperbolic,
                        const data::HypernymyGraph& g);
RankResult rank_metrics_serial(const Matrix& means, bool hyperbolic,
                               const data::HypernymyGraph& g);
// Ranking on an explicit pairwise score matrix (lower = closer); shared
// by the KL-based ranking flag and the brute-force test oracle.
RankResult rank_metrics_from_matrix(const Matrix& d,
                                    const data::HypernymyGraph& g);
// Scores KL(q_s || q_t') by seeded Monte Carlo instead of mean distance.
RankResult rank_metrics_kl(const std::vector<dist::WrappedDistribution>& q,
                           const data::HypernymyGraph& g, int n_samples,
                           std::uint64_t seed);

// Poincare norm of a mean embedding (Euclidean norm for the baseline).
double embedding_norm(const Vec& mean_params, bool hyperbolic);
double root_norm(const Matrix& means, bool hyperbolic, std::size_t root_id);

// Named per-seed metric values with mean and (>= 2 seeds) stddev.
struct MetricReport {
  int schema_version = 1;
  std::vector<std::string> names;
  std::unordered_map<std::string, std::vector<double>> values;

  void add(const std::string& name, double v);
  const std::vector<double>& at(const std::string& name) const;
  double mean(const std::string& name) const;
  std::optional<double> stddev(const std::string& name) const;
  std::string to_json() const;
  void write_json(const std::string& path) const;
};

// Table-style CSV: one row per kind, one column per sweep value.
std::string report_table_csv(
    const std::string& corner_label,
    const std::vector<std::string>& row_names,
    const std::vector<std::string>& col_names,
    const std::vector<std::vector<std::string>>& cells);

}  // namespace hyprown::eval
