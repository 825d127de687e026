#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "hyprown/config.hpp"
#include "hyprown/datasets.hpp"
#include "hyprown/eval.hpp"
#include "hyprown/geometry.hpp"
#include "hyprown/models.hpp"

namespace fs = std::filesystem;
using namespace hyprown;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

models::VaeConfig vae_config_from(const config::RunConfig& cfg,
                                  std::uint64_t seed) {
  int depth = cfg.depth;
  models::VaeConfig v = models::default_vae_config(depth);
  v.kind = dist::parse_kind(cfg.kind);
  v.flavor = dist::parse_flavor(cfg.flavor);
  if (cfg.latent_dim > 0) {
    v.latent_dim = static_cast<std::size_t>(cfg.latent_dim);
    v.hidden = std::size_t{1} << (cfg.latent_dim + 3);
  }
  v.sigma_obs = cfg.sigma_obs;
  v.lr = cfg.lr;
  v.batch_size = cfg.batch_size;
  v.epochs = cfg.epochs;
  v.kl_samples = cfg.kl_samples;
  v.clip_norm = cfg.clip_norm;
  v.seed = seed;
  return v;
}

models::EmbedConfig embed_config_from(const config::RunConfig& cfg,
                                      std::uint64_t seed) {
  models::EmbedConfig e;
  e.kind = dist::parse_kind(cfg.kind);
  e.flavor = dist::parse_flavor(cfg.flavor);
  e.dim = static_cast<std::size_t>(cfg.dim);
  e.margin = cfg.margin;
  e.negatives = cfg.negatives;
  e.kl_samples = cfg.kl_samples;
  e.epochs = cfg.epochs;
  e.burnin_epochs = cfg.burnin_epochs;
  e.lr_burnin = cfg.lr_burnin;
  e.lr_main = cfg.lr_main;
  e.lr_full = cfg.lr_full;
  e.clip_norm = cfg.clip_norm;
  e.seed = seed;
  return e;
}

// Root = first word that never appears as a child. Returns vocab size
// when the graph has no root (cycles).
std::size_t find_root(const data::HypernymyGraph& g) {
  std::vector<bool> is_child(g.n_words(), false);
  for (const auto& e : g.edges) is_child[e.first] = true;
  for (std::size_t i = 0; i < g.n_words(); ++i) {
    if (!is_child[i]) return i;
  }
  return g.n_words();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix test_latents(const models::MlpVae& vae, const data::TreeDataset& ds) {
  std::size_t n = ds.count_test();
  Matrix x(n, ds.input_dim());
  std::size_t r = 0;
  for (const data::TreeSample& s : ds.samples) {
    if (s.test) x.set_row(r++, s.x);
  }
  return models::encode_latents(vae, x);
}

void add_vae_metrics(eval::MetricReport& rep, const models::MlpVae& vae,
                     const models::VaeRun& run,
                     const data::TreeDataset& ds) {
  Matrix latents = test_latents(vae, ds);
  eval::TreeCorrelations tc = eval::tree_correlations(
      latents, vae.cfg.kind != dist::Kind::euclidean, ds);
  rep.add("r_distance", tc.r_distance);
  rep.add("r_depth", tc.r_depth);
  if (!run.history.empty()) {
    rep.add("train_elbo", run.history.back().train_elbo);
    rep.add("test_elbo", run.history.back().test_elbo);
  }
  rep.add("diverged", vae.diverged ? 1.0 : 0.0);
}

void add_embed_metrics(eval::MetricReport& rep,
                       const models::WordEmbeddingTable& table,
                       const data::HypernymyGraph& g, double final_loss) {
  bool hyp = table.cfg.kind != dist::Kind::euclidean;
  eval::RankResult rr = eval::rank_metrics(table.means, hyp, g);
  rep.add("mean_rank", rr.mean_rank);
  rep.add("map", rr.map);
  std::vector<double> norms(table.vocab());
  for (std::size_t i = 0; i < table.vocab(); ++i) {
    norms[i] = eval::embedding_norm(table.means.row_vec(i), hyp);
  }
  std::size_t root = find_root(g);
  if (root < table.vocab()) {
    rep.add("root_norm", norms[root]);
  }
  rep.add("median_norm", median(norms));
  rep.add("final_loss", final_loss);
  rep.add("diverged", table.diverged ? 1.0 : 0.0);
}

std::string jsonl_vae(const models::VaeEpoch& e) {
  std::ostringstream os;
  os << "{\"epoch\": " << e.epoch
     << ", \"train_elbo\": " << format_double(e.train_elbo)
     << ", \"test_elbo\": " << format_double(e.test_elbo) << "}\n";
  return os.str();
}

std::string jsonl_embed(const models::EmbedEpoch& e) {
  std::ostringstream os;
  os << "{\"epoch\": " << e.epoch
     << ", \"loss\": " << format_double(e.mean_loss)
     << ", \"lr\": " << format_double(e.lr) << "}\n";
  return os.str();
}

struct SeedOutcome {
  bool diverged = false;
  eval::MetricReport metrics;
};

// Runs one seed into dir; the dataset is shared across seeds.
SeedOutcome run_tree_vae_seed(const config::RunConfig& cfg,
                              std::uint64_t seed,
                              const data::TreeDataset& ds,
                              const fs::path& dir) {
  fs::create_directories(dir);
  config::RunConfig echoed = cfg;
  echoed.seeds = {seed};
  write_text(dir / "config.cfg", config::to_flat(echoed));
  write_text(dir / "config.json", config::to_json(echoed));

  models::VaeConfig vcfg = vae_config_from(cfg, seed);
  models::VaeRun run = models::train_vae(vcfg, ds);
  std::ostringstream hist;
  for (const models::VaeEpoch& e : run.history) hist << jsonl_vae(e);
  write_text(dir / "history.jsonl", hist.str());
  models::save_vae(run.vae, (dir / "checkpoint.bin").string());

  SeedOutcome out;
  out.diverged = run.vae.diverged;
  add_vae_metrics(out.metrics, run.vae, run, ds);
  out.metrics.write_json((dir / "metrics.json").string());
  for (const models::VaeEpoch& e : run.history) {
    if (e.epoch % 25 == 0 || e.epoch + 1 == static_cast<int>(run.history.size())) {
      std::printf("seed %llu epoch %d train_elbo %.4f test_elbo %.4f\n",
                  static_cast<unsigned long long>(seed), e.epoch,
                  e.train_elbo, e.test_elbo);
    }
  }
  return out;
}

SeedOutcome run_embed_seed(const config::RunConfig& cfg, std::uint64_t seed,
                           const data::HypernymyGraph& g,
                           const std::vector<std::string>& words,
                           const fs::path& dir) {
  fs::create_directories(dir);
  config::RunConfig echoed = cfg;
  echoed.seeds = {seed};
  write_text(dir / "config.cfg", config::to_flat(echoed));
  write_text(dir / "config.json", config::to_json(echoed));

  models::EmbedConfig ecfg = embed_config_from(cfg, seed);
  models::EmbedRun run = models::train_embeddings(ecfg, g);
  std::ostringstream hist;
  for (const models::EmbedEpoch& e : run.history) hist << jsonl_embed(e);
  write_text(dir / "history.jsonl", hist.str());
  models::save_table(run.table, words, (dir / "checkpoint.bin").string());

  SeedOutcome out;
  out.diverged = run.table.diverged;
  double final_loss =
      run.history.empty() ? 0.0 : run.history.back().mean_loss;
  add_embed_metrics(out.metrics, run.table, g, final_loss);
  out.metrics.write_json((dir / "metrics.json").string());
  for (const models::EmbedEpoch& e : run.history) {
    if (e.epoch % 25 == 0 || e.epoch + 1 == static_cast<int>(run.history.size())) {
      std::printf("seed %llu epoch %d loss %.4f lr %.3f\n",
                  static_cast<unsigned long long>(seed), e.epoch, e.mean_loss,
                  e.lr);
    }
  }
  return out;
}

// Merges per-seed metric files (written by children) into one report.
eval::MetricReport merge_seed_metrics(const config::RunConfig& cfg,
                                      const fs::path& out_dir) {
  eval::MetricReport rep;
  for (std::uint64_t seed : cfg.seeds) {
    fs::path p = out_dir / ("seed" + std::to_string(seed)) / "metrics.json";
    std::ifstream f(p);
    if (!f) throw IoError("missing per-seed metrics: " + p.string());
    nlohmann::ordered_json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad metrics file " + p.string() + ": " + e.what());
    }
    for (const auto& [name, entry] : j.at("metrics").items()) {
      for (const auto& v : entry.at("values")) {
        rep.add(name, v.get<double>());
      }
    }
  }
  return rep;
}

int cmd_train(const config::RunConfig& cfg, int parallel) {
  config::RunConfig resolved = cfg;
  fs::path out_dir(resolved.out);
  fs::create_directories(out_dir);

  // Materialize the dataset once so every seed trains on the same data.
  data::TreeDataset ds;
  data::HypernymyGraph graph;
  std::vector<std::string> words;
  if (resolved.experiment == "tree-vae") {
    if (resolved.data.empty()) {
      ds = data::make_tree_dataset(resolved.depth, resolved.samples_per_node,
                                   resolved.theta_max,
                                   resolved.test_fraction,
                                   resolved.seeds.front());
      fs::path dpath = out_dir / "dataset.csv";
      data::write_tree_csv(ds, dpath.string());
      data::write_tree_metadata(ds, (out_dir / "dataset.json").string());
      resolved.data = dpath.string();
    } else {
      ds = data::read_tree_csv(resolved.data);
    }
  } else {
    if (resolved.data.empty()) {
      auto edges = data::binary_tree_parent_edges(resolved.depth);
      fs::path dpath = out_dir / "edges.tsv";
      data::write_edge_tsv(edges, dpath.string());
      resolved.data = dpath.string();
    }
    graph = data::load_hypernymy(resolved.data, resolved.transitive_closure);
    words = graph.words;
  }
  write_text(out_dir / "config.cfg", config::to_flat(resolved));
  write_text(out_dir / "config.json", config::to_json(resolved));

  auto run_seed = [&](std::uint64_t seed) -> SeedOutcome {
    fs::path dir = out_dir / ("seed" + std::to_string(seed));
    if (resolved.experiment == "tree-vae") {
      return run_tree_vae_seed(resolved, seed, ds, dir);
    }
    return run_embed_seed(resolved, seed, graph, words, dir);
  };

  bool any_diverged = false;
  eval::MetricReport report;
  if (parallel > 1 && resolved.seeds.size() > 1) {
    std::vector<pid_t> pids;
    std::size_t next = 0;
    std::size_t active = 0;
    int worst = kExitOk;
    while (next < resolved.seeds.size() || active > 0) {
      while (next < resolved.seeds.size() &&
             active < static_cast<std::size_t>(parallel)) {
        std::uint64_t seed = resolved.seeds[next++];
        pid_t pid = fork();
        if (pid < 0) throw IoError("fork failed");
        if (pid == 0) {
          int code = kExitOk;
          try {
            SeedOutcome o = run_seed(seed);
            code = o.diverged ? kExitNumeric : kExitOk;
          } catch (...) {
            code = kExitNumeric;
          }
          _exit(code);
        }
        pids.push_back(pid);
        ++active;
      }
      int status = 0;
      pid_t done = waitpid(-1, &status, 0);
      if (done > 0) {
        --active;
        int code = WIFEXITED(status) ? WEXITSTATUS(status) : kExitNumeric;
        if (code != kExitOk) worst = std::max(worst, code);
      }
    }
    any_diverged = worst != kExitOk;
    report = merge_seed_metrics(resolved, out_dir);
  } else {
    for (std::uint64_t seed : resolved.seeds) {
      SeedOutcome o = run_seed(seed);
      any_diverged = any_diverged || o.diverged;
      for (const std::string& name : o.metrics.names) {
        report.add(name, o.metrics.at(name).front());
      }
    }
  }

  report.write_json((out_dir / "report.json").string());
  std::printf("%s", report.to_json().c_str());
  return any_diverged ? kExitNumeric : kExitOk;
}

// Tangent-space PCA projection to 2 columns via the top-2 eigenvectors
// of the mean-parameter covariance.
Matrix pca_project(const Matrix& means) {
  const std::size_t n = means.rows, d = means.cols;
  Vec mu(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mu[j] += means(i, j);
  }
  for (double& v : mu) v /= static_cast<double>(n);
  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      double da = means(i, a) - mu[a];
      for (std::size_t b = 0; b < d; ++b) {
        cov(a, b) += da * (means(i, b) - mu[b]) / static_cast<double>(n);
      }
    }
  }
  SymmetricEigen se = symmetric_eigen(cov);
  Matrix out(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        s += (means(i, j) - mu[j]) * se.vectors(j, c);
      }
      out(i, c) = s;
    }
  }
  return out;
}

Vec poincare2_of_params(const Vec& mean2, bool hyperbolic) {
  if (!hyperbolic) return mean2;
  geo::LorentzPoint p = geo::wrap(geo::LorentzPoint::origin(2), mean2);
  return geo::to_poincare(p).coords;
}

struct EvalArgs {
  std::string run_dir;
  std::string checkpoint;
  std::string data;
  bool transitive_closure = false;
  bool kl_rank = false;
  int kl_samples = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string export_poincare;
  std::string project;
};

int cmd_eval(EvalArgs args) {
  if (!args.run_dir.empty()) {
    fs::path dir(args.run_dir);
    config::RunConfig rc =
        config::parse_config_file((dir / "config.cfg").string());
    if (args.checkpoint.empty()) {
      args.checkpoint = (dir / "checkpoint.bin").string();
      if (!fs::exists(args.checkpoint)) {
        // Multi-seed directory: use the first seed's checkpoint.
        args.checkpoint =
            (dir / ("seed" + std::to_string(rc.seeds.front())) /
             "checkpoint.bin")
                .string();
      }
    }
    if (args.data.empty()) args.data = rc.data;
    args.transitive_closure = rc.transitive_closure;
  }
  if (args.checkpoint.empty() || args.data.empty()) {
    throw ConfigError("eval needs --run or both --checkpoint and --data");
  }
  if (!fs::exists(args.checkpoint)) {
    throw ConfigError("checkpoint not found: " + args.checkpoint);
  }

  eval::MetricReport rep;
  models::CheckpointType type = models::peek_checkpoint(args.checkpoint);

  bool hyp = true;
  Matrix plot_params;             // [N, d] tangent mean parameters
  std::vector<std::string> plot_labels;
  if (type == models::CheckpointType::vae) {
    models::MlpVae vae = models::load_vae(args.checkpoint);
    data::TreeDataset ds = data::read_tree_csv(args.data);
    if (ds.input_dim() != vae.cfg.input_dim) {
      throw ConfigError("checkpoint expects input dim " +
                        std::to_string(vae.cfg.input_dim) + ", data has " +
                        std::to_string(ds.input_dim()));
    }
    hyp = vae.cfg.kind != dist::Kind::euclidean;
    Matrix latents = test_latents(vae, ds);
    eval::TreeCorrelations tc = eval::tree_correlations(latents, hyp, ds);
    rep.add("r_distance", tc.r_distance);
    rep.add("r_depth", tc.r_depth);
    rep.add("n_pairs", static_cast<double>(tc.n_pairs));
    if (!args.export_poincare.empty()) {
      Matrix x(ds.count_test(), ds.input_dim());
      std::size_t r = 0;
      for (const data::TreeSample& s : ds.samples) {
        if (!s.test) continue;
        x.set_row(r++, s.x);
        plot_labels.push_back(std::to_string(s.base_node) + "," +
                              std::to_string(s.depth));
      }
      plot_params = models::encode_mean_params(vae, x);
    }
  } else {
    models::LoadedTable lt = models::load_table(args.checkpoint);
    data::HypernymyGraph g =
        data::load_hypernymy(args.data, args.transitive_closure);
    if (g.words != lt.words) {
      throw ConfigError(
          "checkpoint vocabulary does not match the data file");
    }
    hyp = lt.table.cfg.kind != dist::Kind::euclidean;
    eval::RankResult rr =
        args.kl_rank
            ? [&] {
                std::vector<dist::WrappedDistribution> q;
                q.reserve(lt.table.vocab());
                for (std::size_t i = 0; i < lt.table.vocab(); ++i) {
                  q.push_back(lt.table.word_dist(i));
                }
                return eval::rank_metrics_kl(q, g, args.kl_samples,
                                             args.seed);
              }()
            : eval::rank_metrics(lt.table.means, hyp, g);
    rep.add("mean_rank", rr.mean_rank);
    rep.add("map", rr.map);
    std::vector<double> norms(lt.table.vocab());
    for (std::size_t i = 0; i < lt.table.vocab(); ++i) {
      norms[i] = eval::embedding_norm(lt.table.means.row_vec(i), hyp);
    }
    std::size_t root = find_root(g);
    if (root < lt.table.vocab()) rep.add("root_norm", norms[root]);
    rep.add("median_norm", median(norms));
    if (!args.export_poincare.empty()) {
      plot_params = lt.table.means;
      plot_labels = lt.words;
    }
  }

  if (!args.export_poincare.empty()) {
    Matrix p2;
    if (plot_params.cols == 2) {
      p2 = plot_params;
    } else if (args.project == "pca") {
      p2 = pca_project(plot_params);
    } else {
      throw ConfigError(
          "--export-poincare needs --project pca for dimension > 2");
    }
    std::ostringstream os;
    os << (type == models::CheckpointType::vae ? "base_node,depth,p_1,p_2"
                                               : "word,p_1,p_2")
       << "\n";
    for (std::size_t i = 0; i < p2.rows; ++i) {
      Vec pc = poincare2_of_params(p2.row_vec(i), hyp);
      os << plot_labels[i] << "," << format_double(pc[0]) << ","
         << format_double(pc[1]) << "\n";
    }
    write_text(args.export_poincare, os.str());
  }

  std::printf("%s", rep.to_json().c_str());
  if (!args.out.empty()) rep.write_json(args.out);
  return kExitOk;
}

int cmd_export(const std::string& checkpoint, const std::string& out) {
  if (models::peek_checkpoint(checkpoint) != models::CheckpointType::embed) {
    throw ConfigError("export needs an embedding checkpoint");
  }
  models::LoadedTable lt = models::load_table(checkpoint);
  bool hyp = lt.table.cfg.kind != dist::Kind::euclidean;
  const std::size_t n = lt.table.cfg.dim;
  std::ostringstream os;
  os << "word,poincare_norm";
  for (std::size_t j = 1; j <= n; ++j) os << ",x_" << j;
  os << "\n";
  geo::LorentzPoint origin = geo::LorentzPoint::origin(n);
  for (std::size_t i = 0; i < lt.table.vocab(); ++i) {
    Vec m = lt.table.means.row_vec(i);
    Vec coords = hyp ? geo::to_poincare(geo::wrap(origin, m)).coords : m;
    os << lt.words[i] << "," << format_double(norm2(coords));
    for (double c : coords) os << "," << format_double(c);
    os << "\n";
  }
  write_text(out, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentz-model wrapped normal embeddings and VAEs"};
  app.require_subcommand(1);

  // gen-tree
  auto* gen = app.add_subcommand("gen-tree",
                                 "Generate a noisy binary tree dataset");
  int g_depth = 3;
  int g_spn = 50;
  double g_theta = 0.78539816339744831;
  double g_frac = 0.2;
  std::uint64_t g_seed = 0;
  std::string g_out = "tree.csv";
  std::string g_edges;
  gen->add_option("--depth", g_depth, "Tree depth (1..12)");
  gen->add_option("--samples-per-node", g_spn, "Noisy samples per node");
  gen->add_option("--theta-max", g_theta, "Max spherical noise angle");
  gen->add_option("--test-fraction", g_frac, "Held-out fraction");
  gen->add_option("--seed", g_seed, "Dataset seed");
  gen->add_option("--out", g_out, "Output CSV path");
  gen->add_option("--edges", g_edges,
                  "Also write the parent edge list TSV here");

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string t_config;
  int t_parallel = 1;
  std::vector<std::pair<std::string, std::string>> t_overrides;
  train->add_option("--config", t_config, "Flat key = value config file");
  train->add_option("--parallel", t_parallel,
                    "Run up to k seeds as parallel processes");
  auto add_override = [&](const std::string& flag, const std::string& key,
                          const std::string& help) {
    train->add_option_function<std::string>(
        flag,
        [&t_overrides, key](const std::string& v) {
          t_overrides.emplace_back(key, v);
        },
        help);
  };
  add_override("--experiment", "experiment", "tree-vae | embed");
  add_override("--kind", "kind", "euclidean | hwn | rown");
  add_override("--flavor", "flavor", "isotropic | diagonal | full");
  add_override("--depth", "depth", "Tree depth");
  add_override("--latent-dim", "latent_dim", "VAE latent dim (0 = depth)");
  add_override("--samples-per-node", "samples_per_node",
               "Tree samples per node");
  add_override("--theta-max", "theta_max", "Max noise angle");
  add_override("--test-fraction", "test_fraction", "Held-out fraction");
  add_override("--lr", "lr", "VAE Adam learning rate");
  add_override("--batch-size", "batch_size", "VAE batch size");
  add_override("--sigma-obs", "sigma_obs", "Observation stddev");
  add_override("--dim", "dim", "Embedding dimension");
  add_override("--margin", "margin", "Hinge margin");
  add_override("--negatives", "negatives", "Negatives per positive");
  add_override("--burnin-epochs", "burnin_epochs", "Warm-up epochs");
  add_override("--lr-burnin", "lr_burnin", "Warm-up learning rate");
  add_override("--lr-main", "lr_main", "Post-warm-up learning rate");
  add_override("--lr-full", "lr_full", "Flat rate for the full flavor");
  add_override("--transitive-closure", "transitive_closure",
               "Expand edges to ancestors (true/false)");
  add_override("--epochs", "epochs", "Training epochs");
  add_override("--kl-samples", "kl_samples", "MC samples per KL estimate");
  add_override("--clip-norm", "clip_norm", "Global gradient clip");
  add_override("--seeds", "seeds", "Comma-separated seed list");
  add_override("--data", "data", "Dataset path (generated if empty)");
  add_override("--out", "out", "Run directory");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  EvalArgs e_args;
  ev->add_option("--run", e_args.run_dir, "Run directory from train");
  ev->add_option("--checkpoint", e_args.checkpoint, "Checkpoint file");
  ev->add_option("--data", e_args.data, "Dataset path");
  ev->add_flag("--transitive-closure", e_args.transitive_closure,
               "Expand edges to ancestors");
  ev->add_flag("--kl-rank", e_args.kl_rank,
               "Rank by Monte-Carlo KL instead of mean distance");
  ev->add_option("--kl-samples", e_args.kl_samples, "Samples per KL");
  ev->add_option("--seed", e_args.seed, "Seed for KL ranking");
  ev->add_option("--out", e_args.out, "Write MetricReport JSON here");
  ev->add_option("--export-poincare", e_args.export_poincare,
                 "Write 2-d Poincare coordinates CSV here");
  ev->add_option("--project", e_args.project,
                 "Projection for dim > 2 exports (pca)");

  // export
  auto* ex = app.add_subcommand("export", "Export embedding CSV");
  std::string x_checkpoint, x_out = "embeddings.csv";
  ex->add_option("--checkpoint", x_checkpoint, "Embedding checkpoint")
      ->required();
  ex->add_option("--out", x_out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      data::TreeDataset ds =
          data::make_tree_dataset(g_depth, g_spn, g_theta, g_frac, g_seed);
      data::write_tree_csv(ds, g_out);
      fs::path meta = fs::path(g_out).replace_extension(".json");
      data::write_tree_metadata(ds, meta.string());
      if (!g_edges.empty()) {
        data::write_edge_tsv(data::binary_tree_parent_edges(g_depth),
                             g_edges);
      }
      std::printf("wrote %zu samples to %s (metadata %s)\n",
                  ds.samples.size(), g_out.c_str(), meta.string().c_str());
      return kExitOk;
    }
    if (train->parsed()) {
      config::RunConfig cfg;
      if (!t_config.empty()) cfg = config::parse_config_file(t_config);
      for (const auto& kv : t_overrides) {
        config::apply_override(cfg, kv.first, kv.second);
      }
      config::validate(cfg);
      if (t_parallel < 1) throw ConfigError("--parallel must be >= 1");
      return cmd_train(cfg, t_parallel);
    }
    if (ev->parsed()) return cmd_eval(e_args);
    if (ex->parsed()) return cmd_export(x_checkpoint, x_out);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
