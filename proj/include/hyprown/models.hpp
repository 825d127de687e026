#pragma once

#include <string>
#include <vector>

#include "hyprown/autodiff.hpp"
#include "hyprown/common.hpp"
#include "hyprown/datasets.hpp"
#include "hyprown/distributions.hpp"
#include "hyprown/linalg.hpp"

namespace hyprown::models {

// ---------------------------------------------------------------------
// Hyperbolic VAE over the noisy binary tree.

struct VaeConfig {
  dist::Kind kind = dist::Kind::rown;
  dist::Flavor flavor = dist::Flavor::diagonal;
  std::size_t input_dim = 15;  // 2^depth - 1
  std::size_t latent_dim = 4;
  std::size_t hidden = 128;    // 2^(depth+3)
  double sigma_obs = 0.3;
  double lr = 1e-3;
  int batch_size = 100;
  int epochs = 500;
  int kl_samples = 1;
  double clip_norm = 10.0;
  std::uint64_t seed = 0;
};

// input -> 2^(d+3) -> 2^(d+3) -> 2d for a depth-d tree, latent dim d.
VaeConfig default_vae_config(int depth);

// Plain fully connected net; ReLU on all layers except the last.
struct Mlp {
  std::vector<Matrix> w;  // [in, out]
  std::vector<Matrix> b;  // [1, out]
};

Mlp make_mlp(const std::vector<std::size_t>& dims, Rng& rng);
Matrix mlp_forward(const Mlp& m, const Matrix& x);

struct MlpVae {
  VaeConfig cfg;
  Mlp encoder;  // input -> hidden -> hidden -> latent + cov columns
  Mlp decoder;  // latent -> hidden -> hidden -> input
  bool diverged = false;

  // Raw covariance columns produced by the encoder head. The isotropic
  // flavor shares the diagonal head and averages it to one column.
  std::size_t cov_cols() const;
};

MlpVae make_vae(const VaeConfig& cfg, Rng& rng);

// Registers matrices as tape leaves and remembers where their gradients
// must flow back; one instance per tape build.
class ParamBind {
 public:
  explicit ParamBind(ad::Tape& t) : tape_(&t) {}
  ad::Var bind(Matrix& m);
  std::vector<Matrix*> params() const { return params_; }
  std::vector<Matrix> grads() const;
  ad::Tape& tape() const { return *tape_; }

 private:
  ad::Tape* tape_ = nullptr;
  std::vector<Matrix*> params_;
  std::vector<ad::Var> leaves_;
};

struct MlpVars {
  std::vector<ad::Var> w;
  std::vector<ad::Var> b;
};

MlpVars bind_mlp(ParamBind& bind, Mlp& m);
ad::Var mlp_apply(const MlpVars& v, ad::Var x);

// Mean over the batch of [recon log-likelihood - MC KL(q(z|x) || p(z))],
// KL averaged over kl_samples reparameterized draws shared with the
// reconstruction term.
ad::Var elbo(ParamBind& bind, MlpVae& vae, const Matrix& batch,
             int kl_samples, Rng& rng);

struct VaeEpoch {
  int epoch = 0;
  double train_elbo = 0.0;
  double test_elbo = 0.0;
};

struct VaeRun {
  MlpVae vae;
  std::vector<VaeEpoch> history;
};

VaeRun train_vae(const VaeConfig& cfg, const data::TreeDataset& ds);

// Non-recorded ELBO estimate over a data matrix (one pass, seeded noise).
double eval_elbo(MlpVae& vae, const Matrix& x, int kl_samples, Rng& rng);

// Encoder means for evaluation: Lorentz coordinates [N, d+1] for
// hyperbolic kinds, plain means [N, d] for the euclidean baseline.
Matrix encode_latents(const MlpVae& vae, const Matrix& x);
// Raw encoder mean parameters [N, d].
Matrix encode_mean_params(const MlpVae& vae, const Matrix& x);

// ---------------------------------------------------------------------
// Probabilistic hypernymy embeddings (hinge on KL divergences).

struct EmbedConfig {
  dist::Kind kind = dist::Kind::rown;
  dist::Flavor flavor = dist::Flavor::diagonal;
  std::size_t dim = 10;
  double margin = 1.0;
  int negatives = 10;
  int kl_samples = 1;       // 50 recommended for the full flavor
  int epochs = 300;
  int burnin_epochs = 100;  // warm-up at lr_burnin, then lr_main
  double lr_burnin = 0.015;
  double lr_main = 0.6;
  double lr_full = 0.01;    // flat rate used by the full flavor
  double init_std = 0.1;    // means ~ N(0, init_std^2 I)
  double clip_norm = 10.0;
  std::uint64_t seed = 0;
};

struct WordEmbeddingTable {
  EmbedConfig cfg;
  Matrix means;  // [V, n] tangent mean parameters
  Matrix raws;   // [V, cov columns]
  bool diverged = false;

  std::size_t vocab() const { return means.rows; }
  std::size_t cov_cols() const;
  // Realized per-word distribution (validates parameters).
  dist::WrappedDistribution word_dist(std::size_t i) const;
};

WordEmbeddingTable make_table(const EmbedConfig& cfg, std::size_t vocab,
                              Rng& rng);

double embed_lr(const EmbedConfig& cfg, int epoch);

struct Triple {
  std::size_t s = 0;
  std::size_t t = 0;
  std::vector<std::size_t> negatives;
};

// Binds only the table rows a batch touches; step() applies one clipped
// SGD update to those rows (duplicates accumulate).
class TableBinder {
 public:
  TableBinder(ad::Tape& t, WordEmbeddingTable& table)
      : tape_(&t), table_(&table) {}
  dist::DiffDist rows(const std::vector<std::size_t>& ids);
  void step(double lr, double clip_norm);

 private:
  struct Bound {
    std::vector<std::size_t> ids;
    ad::Var mean;
    ad::Var raw;
  };
  ad::Tape* tape_ = nullptr;
  WordEmbeddingTable* table_ = nullptr;
  std::vector<Bound> bound_;
};

// Mean over triples of the mean hinge over negatives:
// relu(margin + KL(q_s||q_t) - KL(q_s||q_t')). All KL terms of one
// triple reuse the same q_s samples.
ad::Var word_loss(TableBinder& binder, const WordEmbeddingTable& table,
                  const std::vector<Triple>& batch, int kl_samples,
                  Rng& noise_rng);

struct EmbedEpoch {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

struct EmbedRun {
  WordEmbeddingTable table;
  std::vector<EmbedEpoch> history;
};

EmbedRun train_embeddings(const EmbedConfig& cfg,
                          const data::HypernymyGraph& graph);

// ---------------------------------------------------------------------
// Checkpoints: little-endian binary, magic "HYPR", version 1.

enum class CheckpointType : unsigned char { vae = 0, embed = 1 };

CheckpointType peek_checkpoint(const std::string& path);

void save_vae(const MlpVae& vae, const std::string& path);
MlpVae load_vae(const std::string& path);

void save_table(const WordEmbeddingTable& table,
                const std::vector<std::string>& words,
                const std::string& path);

struct LoadedTable {
  WordEmbeddingTable table;
  std::vector<std::string> words;
};

LoadedTable load_table(const std::string& path);

}  // namespace hyprown::models
