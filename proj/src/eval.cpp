#include "hyprown/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hyprown/geometry.hpp"
#include "hyprown/scalar_ops.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hyprown::eval {

namespace {

// Lorentz distance between row i and row j of a coordinate matrix.
double row_distance(const Matrix& pts, std::size_t i, std::size_t j,
                    bool hyperbolic) {
  const std::size_t c = pts.cols;
  const double* a = pts.a.data() + i * c;
  const double* b = pts.a.data() + j * c;
  if (hyperbolic) {
    double s = -a[0] * b[0];
    for (std::size_t k = 1; k < c; ++k) s += a[k] * b[k];
    return scalar::acosh_clamped(-s);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

// Lifts mean parameter rows to Lorentz coordinates ([V, n+1]); identity
// for the euclidean baseline.
Matrix lift_means(const Matrix& means, bool hyperbolic) {
  if (!hyperbolic) return means;
  Matrix out(means.rows, means.cols + 1);
  for (std::size_t i = 0; i < means.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < means.cols; ++j) {
      s += means(i, j) * means(i, j);
    }
    double shc = scalar::sinhc_sq(s);
    out(i, 0) = scalar::cosh_sq(s);
    for (std::size_t j = 0; j < means.cols; ++j) {
      out(i, j + 1) = shc * means(i, j);
    }
  }
  return out;
}

double poincare_norm_of_row(const Matrix& pts, std::size_t i,
                            bool hyperbolic) {
  const std::size_t c = pts.cols;
  double s = 0.0;
  if (hyperbolic) {
    double denom = pts(i, 0) + 1.0;
    for (std::size_t k = 1; k < c; ++k) {
      double p = pts(i, k) / denom;
      s += p * p;
    }
  } else {
    for (std::size_t k = 0; k < c; ++k) s += pts(i, k) * pts(i, k);
  }
  return std::sqrt(s);
}

struct PairList {
  std::vector<std::uint32_t> first;
  std::vector<std::uint32_t> second;
};

PairList enumerate_pairs(std::size_t t, std::size_t max_pairs,
                         std::uint64_t seed) {
  PairList pl;
  std::size_t total = t * (t - 1) / 2;
  if (total <= max_pairs) {
    pl.first.reserve(total);
    pl.second.reserve(total);
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = i + 1; j < t; ++j) {
        pl.first.push_back(static_cast<std::uint32_t>(i));
        pl.second.push_back(static_cast<std::uint32_t>(j));
      }
    }
    return pl;
  }
  Rng rng(seed);
  pl.first.reserve(max_pairs);
  pl.second.reserve(max_pairs);
  while (pl.first.size() < max_pairs) {
    std::size_t i = rng.uniform_index(t);
    std::size_t j = rng.uniform_index(t);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    pl.first.push_back(static_cast<std::uint32_t>(i));
    pl.second.push_back(static_cast<std::uint32_t>(j));
  }
  return pl;
}

TreeCorrelations tree_correlations_impl(const Matrix& latents,
                                        bool hyperbolic,
                                        const data::TreeDataset& ds,
                                        std::size_t max_pairs,
                                        std::uint64_t subsample_seed,
                                        bool parallel) {
  std::vector<std::size_t> test_idx;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (ds.samples[i].test) test_idx.push_back(i);
  }
  const std::size_t t = test_idx.size();
  if (t < 2) {
    throw ContractError("tree_correlations: need at least 2 test samples");
  }
  if (latents.rows != t) {
    throw DimensionError("tree_correlations: expected one latent row per "
                         "test sample (" +
                         std::to_string(t) + "), got " +
                         std::to_string(latents.rows));
  }

  // Depth vs norm over single test samples.
  Vec depths(t), norms(t);
  for (std::size_t k = 0; k < t; ++k) {
    depths[k] = static_cast<double>(ds.samples[test_idx[k]].depth);
    norms[k] = poincare_norm_of_row(latents, k, hyperbolic);
  }

  // Hamming vs embedding distance over test pairs. The distance fill is
  // the hot loop; entries are written per index so the result does not
  // depend on the number of threads.
  PairList pl = enumerate_pairs(t, max_pairs, subsample_seed);
  const std::size_t m = pl.first.size();
  Vec hd(m), ed(m);
  std::vector<int> base(t);
  for (std::size_t k = 0; k < t; ++k) {
    base[k] = static_cast<int>(ds.samples[test_idx[k]].base_node);
  }
  // Hamming distance between tree codes via the pairwise formula
  // d(u,v) = depth(u) + depth(v) - 2*depth(lca).
  auto code_hamming = [&ds](int u, int v) {
    Vec cu = ds.codes.codes.row_vec(static_cast<std::size_t>(u));
    Vec cv = ds.codes.codes.row_vec(static_cast<std::size_t>(v));
    return static_cast<double>(data::hamming(cu, cv));
  };

#ifdef _OPENMP
  if (parallel) {
    int nt = metric_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(m); ++k) {
      std::size_t i = pl.first[static_cast<std::size_t>(k)];
      std::size_t j = pl.second[static_cast<std::size_t>(k)];
      hd[static_cast<std::size_t>(k)] = code_hamming(base[i], base[j]);
      ed[static_cast<std::size_t>(k)] =
          row_distance(latents, i, j, hyperbolic);
    }
  } else
#endif
  {
    (void)parallel;
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t i = pl.first[k];
      std::size_t j = pl.second[k];
      hd[k] = code_hamming(base[i], base[j]);
      ed[k] = row_distance(latents, i, j, hyperbolic);
    }
  }

  TreeCorrelations out;
  out.n_pairs = m;
  out.r_distance = pearson(hd, ed);
  out.r_depth = pearson(depths, norms);
  return out;
}

struct SourceGroup {
  std::size_t source;
  std::vector<std::size_t> edge_ids;  // indices into g.edges
};

std::vector<SourceGroup> group_edges(const data::HypernymyGraph& g) {
  std::unordered_map<std::size_t, std::size_t> slot;
  std::vector<SourceGroup> groups;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    std::size_t s = g.edges[e].first;
    auto it = slot.find(s);
    if (it == slot.end()) {
      slot.emplace(s, groups.size());
      groups.push_back({s, {e}});
    } else {
      groups[it->second].edge_ids.push_back(e);
    }
  }
  return groups;
}

// Ranks and AP for one source given a distance row d[s][.].
void score_source(const data::HypernymyGraph& g, const SourceGroup& grp,
                  const Vec& dist_row, std::vector<double>& ranks_out,
                  double& ap_out) {
  const std::size_t v = g.n_words();
  const auto& pos = g.positives[grp.source];
  Vec neg;
  neg.reserve(v - pos.size() - 1);
  for (std::size_t w = 0; w < v; ++w) {
    if (w == grp.source || pos.count(w)) continue;
    neg.push_back(dist_row[w]);
  }
  std::sort(neg.begin(), neg.end());
  Vec pos_d;
  pos_d.reserve(grp.edge_ids.size());
  for (std::size_t e : grp.edge_ids) {
    double d = dist_row[g.edges[e].second];
    std::size_t smaller = static_cast<std::size_t>(
        std::lower_bound(neg.begin(), neg.end(), d) - neg.begin());
    ranks_out[e] = static_cast<double>(smaller + 1);
    pos_d.push_back(d);
  }
  std::sort(pos_d.begin(), pos_d.end());
  double ap = 0.0;
  for (std::size_t i = 0; i < pos_d.size(); ++i) {
    std::size_t smaller = static_cast<std::size_t>(
        std::lower_bound(neg.begin(), neg.end(), pos_d[i]) - neg.begin());
    ap += static_cast<double>(i + 1) /
          static_cast<double>(smaller + i + 1);
  }
  ap_out = ap / static_cast<double>(pos_d.size());
}

RankResult rank_metrics_impl(const Matrix& means, bool hyperbolic,
                             const data::HypernymyGraph& g, bool parallel) {
  if (means.rows != g.n_words()) {
    throw DimensionError("rank_metrics: table must cover the vocabulary");
  }
  if (g.n_edges() == 0) {
    throw ContractError("rank_metrics: graph has no positive edges");
  }
  Matrix pts = lift_means(means, hyperbolic);
  std::vector<SourceGroup> groups = group_edges(g);
  std::vector<double> ranks(g.n_edges(), 0.0);
  std::vector<double> aps(groups.size(), 0.0);
  const std::size_t v = g.n_words();

  auto process_group = [&](std::size_t gi) {
    Vec dist_row(v);
    std::size_t s = groups[gi].source;
    for (std::size_t w = 0; w < v; ++w) {
      dist_row[w] = row_distance(pts, s, w, hyperbolic);
    }
    score_source(g, groups[gi], dist_row, ranks, aps[gi]);
  };

#ifdef _OPENMP
  if (parallel) {
    int nt = metric_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::ptrdiff_t gi = 0;
         gi < static_cast<std::ptrdiff_t>(groups.size()); ++gi) {
      process_group(static_cast<std::size_t>(gi));
    }
  } else
#endif
  {
    (void)parallel;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) process_group(gi);
  }

  RankResult out;
  out.n_edges = g.n_edges();
  double mr = 0.0;
  for (double r : ranks) mr += r;
  out.mean_rank = mr / static_cast<double>(ranks.size());
  double map = 0.0;
  for (double a : aps) map += a;
  out.map = map / static_cast<double>(aps.size());
  return out;
}

}  // namespace

int metric_threads() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("HYPROWN_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) {
      throw ConfigError("HYPROWN_THREADS must be a positive integer, got '" +
                        std::string(env) + "'");
    }
    if (cap < n) n = static_cast<int>(cap);
  }
  return n;
}

double pearson(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionError("pearson: length mismatch");
  if (a.size() < 2) throw ContractError("pearson: need at least 2 points");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) {
    throw ContractError("pearson: undefined for zero-variance input");
  }
  return sab / std::sqrt(saa * sbb);
}

TreeCorrelations tree_correlations(const Matrix& latents, bool hyperbolic,
                                   const data::TreeDataset& ds,
                                   std::size_t max_pairs,
                                   std::uint64_t subsample_seed) {
  return tree_correlations_impl(latents, hyperbolic, ds, max_pairs,
                                subsample_seed, true);
}

TreeCorrelations tree_correlations_serial(const Matrix& latents,
                                          bool hyperbolic,
                                          const data::TreeDataset& ds,
                                          std::size_t max_pairs,
                                          std::uint64_t subsample_seed) {
  return tree_correlations_impl(latents, hyperbolic, ds, max_pairs,
                                subsample_seed, false);
}

RankResult rank_metrics(const Matrix& means, bool hyperbolic,
                        const data::HypernymyGraph& g) {
  return rank_metrics_impl(means, hyperbolic, g, true);
}

RankResult rank_metrics_serial(const Matrix& means, bool hyperbolic,
                               const data::HypernymyGraph& g) {
  return rank_metrics_impl(means, hyperbolic, g, false);
}

RankResult rank_metrics_from_matrix(const Matrix& d,
                                    const data::HypernymyGraph& g) {
  if (d.rows != g.n_words() || d.cols != g.n_words()) {
    throw DimensionError("rank_metrics_from_matrix: score matrix must be VxV");
  }
  if (g.n_edges() == 0) {
    throw ContractError("rank_metrics_from_matrix: graph has no edges");
  }
  std::vector<SourceGroup> groups = group_edges(g);
  std::vector<double> ranks(g.n_edges(), 0.0);
  std::vector<double> aps(groups.size(), 0.0);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    Vec dist_row = d.row_vec(groups[gi].source);
    score_source(g, groups[gi], dist_row, ranks, aps[gi]);
  }
  RankResult out;
  out.n_edges = g.n_edges();
  double mr = 0.0;
  for (double r : ranks) mr += r;
  out.mean_rank = mr / static_cast<double>(ranks.size());
  double map = 0.0;
  for (double a : aps) map += a;
  out.map = map / static_cast<double>(aps.size());
  return out;
}

RankResult rank_metrics_kl(const std::vector<dist::WrappedDistribution>& q,
                           const data::HypernymyGraph& g, int n_samples,
                           std::uint64_t seed) {
  const std::size_t v = g.n_words();
  if (q.size() != v) {
    throw DimensionError("rank_metrics_kl: need one distribution per word");
  }
  if (n_samples < 1) {
    throw ContractError("rank_metrics_kl: n_samples must be >= 1");
  }
  Matrix d(v, v);
  Rng base(seed);
  for (std::size_t s = 0; s < v; ++s) {
    for (std::size_t t = 0; t < v; ++t) {
      if (s == t) continue;
      Rng pair_rng = base.fork(s * v + t);
      d(s, t) = dist::kl_mc(q[s], q[t], n_samples, pair_rng);
    }
  }
  return rank_metrics_from_matrix(d, g);
}

double embedding_norm(const Vec& mean_params, bool hyperbolic) {
  if (!hyperbolic) return norm2(mean_params);
  geo::LorentzPoint mu =
      geo::wrap(geo::LorentzPoint::origin(mean_params.size()), mean_params);
  return geo::to_poincare(mu).norm();
}

double root_norm(const Matrix& means, bool hyperbolic, std::size_t root_id) {
  if (root_id >= means.rows) throw ContractError("root_norm: bad root id");
  return embedding_norm(means.row_vec(root_id), hyperbolic);
}

void MetricReport::add(const std::string& name, double v) {
  auto it = values.find(name);
  if (it == values.end()) {
    names.push_back(name);
    values[name] = {v};
  } else {
    it->second.push_back(v);
  }
}

const std::vector<double>& MetricReport::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) {
    throw ContractError("MetricReport: unknown metric '" + name + "'");
  }
  return it->second;
}

double MetricReport::mean(const std::string& name) const {
  const std::vector<double>& v = at(name);
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::optional<double> MetricReport::stddev(const std::string& name) const {
  const std::vector<double>& v = at(name);
  if (v.size() < 2) return std::nullopt;
  double m = mean(name);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string MetricReport::to_json() const {
  std::ostringstream os;
  os << "{\n  \"schema_version\": " << schema_version << ",\n"
     << "  \"metrics\": {\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::string& name = names[k];
    const std::vector<double>& v = at(name);
    os << "    \"" << name << "\": {\"values\": [";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ", ";
      os << format_double(v[i]);
    }
    os << "], \"mean\": " << format_double(mean(name));
    if (auto sd = stddev(name)) {
      os << ", \"std\": " << format_double(*sd);
    }
    os << "}";
    os << (k + 1 < names.size() ? ",\n" : "\n");
  }
  os << "  }\n}\n";
  return os.str();
}

void MetricReport::write_json(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("MetricReport: cannot open '" + path + "'");
  f << to_json();
  if (!f) throw IoError("MetricReport: write failed for '" + path + "'");
}

std::string report_table_csv(
    const std::string& corner_label,
    const std::vector<std::string>& row_names,
    const std::vector<std::string>& col_names,
    const std::vector<std::vector<std::string>>& cells) {
  if (cells.size() != row_names.size()) {
    throw DimensionError("report_table_csv: row count mismatch");
  }
  std::ostringstream os;
  os << corner_label;
  for (const std::string& c : col_names) os << "," << c;
  os << "\n";
  for (std::size_t i = 0; i < row_names.size(); ++i) {
    if (cells[i].size() != col_names.size()) {
      throw DimensionError("report_table_csv: column count mismatch");
    }
    os << row_names[i];
    for (const std::string& c : cells[i]) os << "," << c;
    os << "\n";
  }
  return os.str();
}

}  // namespace hyprown::eval
