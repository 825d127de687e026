#include "hyprown/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "hyprown/diffgeo.hpp"
#include "hyprown/geometry.hpp"

namespace hyprown::models {

namespace {

double softplus_inverse(double v) {
  if (v > 30.0) return v;
  return std::log(std::expm1(v));
}

// Raw value realizing unit variance through softplus.
const double kUnitRaw = softplus_inverse(1.0);

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Matrix normal_noise(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.a[i] = rng.normal();
  return m;
}

std::size_t head_cols(dist::Flavor f, std::size_t d) {
  return f == dist::Flavor::full ? d * d : d;
}

}  // namespace

VaeConfig default_vae_config(int depth) {
  if (depth < 1 || depth > 12) {
    throw ContractError("default_vae_config: depth out of range");
  }
  VaeConfig cfg;
  cfg.input_dim = (std::size_t{1} << depth) - 1;
  cfg.latent_dim = static_cast<std::size_t>(depth);
  cfg.hidden = std::size_t{1} << (depth + 3);
  return cfg;
}

Mlp make_mlp(const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw ContractError("make_mlp: need >= 2 layer dims");
  Mlp m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.a[i] = rng.uniform(-limit, limit);
    }
    m.w.push_back(std::move(w));
    m.b.emplace_back(1, fan_out);
  }
  return m;
}

Matrix mlp_forward(const Mlp& m, const Matrix& x) {
  Matrix h = x;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    Matrix z = matmul(h, m.w[l]);
    for (std::size_t i = 0; i < z.rows; ++i) {
      for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += m.b[l](0, j);
    }
    if (l + 1 < m.w.size()) {
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (z.a[i] < 0.0) z.a[i] = 0.0;
      }
    }
    h = std::move(z);
  }
  return h;
}

std::size_t MlpVae::cov_cols() const {
  return head_cols(cfg.flavor, cfg.latent_dim);
}

MlpVae make_vae(const VaeConfig& cfg, Rng& rng) {
  if (cfg.kind == dist::Kind::rown && cfg.flavor == dist::Flavor::full) {
    throw ContractError("make_vae: rown has no full flavor");
  }
  if (cfg.input_dim == 0 || cfg.latent_dim == 0 || cfg.hidden == 0) {
    throw ContractError("make_vae: zero dimension");
  }
  MlpVae vae;
  vae.cfg = cfg;
  std::size_t d = cfg.latent_dim;
  // The isotropic head shares the diagonal head's d columns; they are
  // averaged into the single raw parameter downstream.
  std::size_t enc_out = d + (cfg.flavor == dist::Flavor::full ? d * d : d);
  vae.encoder =
      make_mlp({cfg.input_dim, cfg.hidden, cfg.hidden, enc_out}, rng);
  vae.decoder = make_mlp({d, cfg.hidden, cfg.hidden, cfg.input_dim}, rng);
  return vae;
}

ad::Var ParamBind::bind(Matrix& m) {
  ad::Var v = tape_->leaf(m);
  params_.push_back(&m);
  leaves_.push_back(v);
  return v;
}

std::vector<Matrix> ParamBind::grads() const {
  std::vector<Matrix> g;
  g.reserve(leaves_.size());
  for (const ad::Var& v : leaves_) g.push_back(v.grad());
  return g;
}

MlpVars bind_mlp(ParamBind& bind, Mlp& m) {
  MlpVars v;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    v.w.push_back(bind.bind(m.w[l]));
    v.b.push_back(bind.bind(m.b[l]));
  }
  return v;
}

ad::Var mlp_apply(const MlpVars& v, ad::Var x) {
  ad::Var h = x;
  for (std::size_t l = 0; l < v.w.size(); ++l) {
    h = ad::add(ad::matmul(h, v.w[l]), v.b[l]);
    if (l + 1 < v.w.size()) h = ad::relu(h);
  }
  return h;
}

namespace {

// Shared-parameter prior q(z) = N(0, I) on the tape: hyperbolic kinds
// use the wrapped normal at the origin.
dist::DiffDist make_prior(ad::Tape& t, dist::Kind kind, std::size_t d) {
  dist::Kind pk =
      kind == dist::Kind::euclidean ? dist::Kind::euclidean : dist::Kind::hwn;
  ad::Var mean = t.constant(Matrix(1, d));
  ad::Var raw = t.constant(Matrix(1, d, kUnitRaw));
  return dist::DiffDist{pk, dist::Flavor::diagonal, d, mean, raw};
}

struct ElboParts {
  ad::Var elbo;  // [1,1]
};

ElboParts build_elbo(ParamBind& bind, MlpVae& vae, const Matrix& batch,
                     int kl_samples, Rng& rng) {
  if (batch.cols != vae.cfg.input_dim) {
    throw DimensionError("elbo: batch has " + std::to_string(batch.cols) +
                         " columns, decoder emits " +
                         std::to_string(vae.cfg.input_dim));
  }
  if (batch.rows == 0) throw ContractError("elbo: empty batch");
  if (kl_samples < 1) throw ContractError("elbo: kl_samples must be >= 1");
  for (std::size_t i = 0; i < batch.rows; ++i) {
    for (std::size_t j = 0; j < batch.cols; ++j) {
      if (!std::isfinite(batch(i, j))) {
        throw NumericError("elbo: non-finite input at batch row " +
                           std::to_string(i));
      }
    }
  }

  ad::Tape& t = bind.tape();
  const std::size_t d = vae.cfg.latent_dim;
  const std::size_t b = batch.rows;
  const bool hyp = vae.cfg.kind != dist::Kind::euclidean;

  MlpVars enc = bind_mlp(bind, vae.encoder);
  MlpVars dec = bind_mlp(bind, vae.decoder);
  ad::Var x = t.constant(batch);

  ad::Var enc_out = mlp_apply(enc, x);
  ad::Var mean = ad::slice_cols(enc_out, 0, d);
  ad::Var raw = ad::slice_cols(enc_out, d, head_cols(vae.cfg.flavor, d));
  if (vae.cfg.flavor == dist::Flavor::isotropic) {
    raw = ad::scale(ad::sum_cols(raw), 1.0 / static_cast<double>(d));
  }
  dist::DiffDist q{vae.cfg.kind, vae.cfg.flavor, d, mean, raw};
  dist::DiffDist prior = make_prior(t, vae.cfg.kind, d);

  const double s2 = vae.cfg.sigma_obs * vae.cfg.sigma_obs;
  const double nll_const = -0.5 * static_cast<double>(vae.cfg.input_dim) *
                           (kLog2Pi + std::log(s2));
  ad::Var origin = hyp ? ad::dgeo::origin_rows(t, d) : ad::Var{};

  ad::Var total{};
  for (int s = 0; s < kl_samples; ++s) {
    ad::Var eps = t.constant(
        normal_noise(rng, b, dist::noise_cols(vae.cfg.flavor, d)));
    ad::Var z = dist::sample_rows(q, eps);
    ad::Var dec_in = hyp ? ad::dgeo::unwrap_rows(origin, z) : z;
    ad::Var xhat = mlp_apply(dec, dec_in);
    ad::Var sq = ad::sum_cols(ad::square(ad::sub(x, xhat)));
    ad::Var recon = ad::add_scalar(ad::scale(sq, -0.5 / s2), nll_const);
    ad::Var lq = dist::log_prob_rows(q, z);
    ad::Var lp = dist::log_prob_rows(prior, z);
    ad::Var term = ad::add(ad::sub(recon, lq), lp);
    total = s == 0 ? term : ad::add(total, term);
  }
  ElboParts out;
  out.elbo =
      ad::mean_all(ad::scale(total, 1.0 / static_cast<double>(kl_samples)));
  return out;
}

}  // namespace

ad::Var elbo(ParamBind& bind, MlpVae& vae, const Matrix& batch,
             int kl_samples, Rng& rng) {
  return build_elbo(bind, vae, batch, kl_samples, rng).elbo;
}

double eval_elbo(MlpVae& vae, const Matrix& x, int kl_samples, Rng& rng) {
  if (x.rows == 0) throw ContractError("eval_elbo: empty data");
  const std::size_t chunk =
      std::max<std::size_t>(1, static_cast<std::size_t>(vae.cfg.batch_size));
  double total = 0.0;
  for (std::size_t start = 0; start < x.rows; start += chunk) {
    std::size_t n = std::min(chunk, x.rows - start);
    Matrix part(n, x.cols);
    for (std::size_t i = 0; i < n; ++i) {
      part.set_row(i, x.row_vec(start + i));
    }
    ad::Tape t;
    ParamBind bind(t);
    ad::Var e = elbo(bind, vae, part, kl_samples, rng);
    total += e.value()(0, 0) * static_cast<double>(n);
  }
  return total / static_cast<double>(x.rows);
}

namespace {

Matrix dataset_matrix(const data::TreeDataset& ds, bool test) {
  std::size_t n = 0;
  for (const data::TreeSample& s : ds.samples) {
    if (s.test == test) ++n;
  }
  Matrix m(n, ds.input_dim());
  std::size_t r = 0;
  for (const data::TreeSample& s : ds.samples) {
    if (s.test == test) m.set_row(r++, s.x);
  }
  return m;
}

std::pair<Mlp, Mlp> snapshot_vae(const MlpVae& vae) {
  return {vae.encoder, vae.decoder};
}

}  // namespace

VaeRun train_vae(const VaeConfig& cfg, const data::TreeDataset& ds) {
  if (ds.input_dim() != cfg.input_dim) {
    throw ContractError("train_vae: dataset code dimension " +
                        std::to_string(ds.input_dim()) +
                        " does not match config input_dim " +
                        std::to_string(cfg.input_dim));
  }
  Matrix train = dataset_matrix(ds, false);
  Matrix test = dataset_matrix(ds, true);
  if (train.rows == 0) throw ContractError("train_vae: empty train split");

  Rng root(cfg.seed);
  Rng init_rng = root.fork(1);
  Rng shuffle_rng = root.fork(2);
  Rng noise_rng = root.fork(3);

  VaeRun run{make_vae(cfg, init_rng), {}};
  MlpVae& vae = run.vae;
  ad::AdamState adam;
  std::pair<Mlp, Mlp> good = snapshot_vae(vae);

  std::vector<std::size_t> order(train.rows);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.batch_size));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_elbo = 0.0;
    bool bad = false;
    for (std::size_t start = 0; start < order.size() && !bad; start += bs) {
      std::size_t n = std::min(bs, order.size() - start);
      Matrix batch(n, train.cols);
      for (std::size_t i = 0; i < n; ++i) {
        batch.set_row(i, train.row_vec(order[start + i]));
      }
      try {
        ad::Tape t;
        ParamBind bind(t);
        ad::Var e = elbo(bind, vae, batch, cfg.kl_samples, noise_rng);
        ad::Var loss = ad::neg(e);
        t.backward(loss);
        std::vector<Matrix> grads = bind.grads();
        ad::clip_global_norm(grads, cfg.clip_norm);
        ad::adam_step(bind.params(), grads, adam, cfg.lr);
        epoch_elbo += e.value()(0, 0) * static_cast<double>(n);
      } catch (const NumericError&) {
        bad = true;
      }
    }
    if (bad) {
      vae.encoder = good.first;
      vae.decoder = good.second;
      vae.diverged = true;
      break;
    }
    VaeEpoch rec;
    rec.epoch = epoch;
    rec.train_elbo = epoch_elbo / static_cast<double>(train.rows);
    if (test.rows > 0) {
      Rng eval_rng = root.fork(1000 + static_cast<std::uint64_t>(epoch));
      rec.test_elbo = eval_elbo(vae, test, cfg.kl_samples, eval_rng);
    } else {
      rec.test_elbo = rec.train_elbo;
    }
    run.history.push_back(rec);
    good = snapshot_vae(vae);
  }
  return run;
}

Matrix encode_mean_params(const MlpVae& vae, const Matrix& x) {
  Matrix enc = mlp_forward(vae.encoder, x);
  Matrix means(enc.rows, vae.cfg.latent_dim);
  for (std::size_t i = 0; i < enc.rows; ++i) {
    for (std::size_t j = 0; j < vae.cfg.latent_dim; ++j) {
      means(i, j) = enc(i, j);
    }
  }
  return means;
}

Matrix encode_latents(const MlpVae& vae, const Matrix& x) {
  Matrix means = encode_mean_params(vae, x);
  if (vae.cfg.kind == dist::Kind::euclidean) return means;
  const std::size_t d = vae.cfg.latent_dim;
  Matrix out(means.rows, d + 1);
  geo::LorentzPoint origin = geo::LorentzPoint::origin(d);
  for (std::size_t i = 0; i < means.rows; ++i) {
    out.set_row(i, geo::wrap(origin, means.row_vec(i)).coords());
  }
  return out;
}

// ---------------------------------------------------------------------

std::size_t WordEmbeddingTable::cov_cols() const {
  switch (cfg.flavor) {
    case dist::Flavor::isotropic: return 1;
    case dist::Flavor::diagonal: return cfg.dim;
    case dist::Flavor::full: return cfg.dim * cfg.dim;
  }
  throw ContractError("cov_cols: bad flavor");
}

dist::WrappedDistribution WordEmbeddingTable::word_dist(std::size_t i) const {
  if (i >= vocab()) throw ContractError("word_dist: index out of range");
  dist::CovarianceSpec spec;
  spec.flavor = cfg.flavor;
  spec.dim = cfg.dim;
  spec.raw = raws.row_vec(i);
  return dist::WrappedDistribution(cfg.kind, means.row_vec(i), spec);
}

WordEmbeddingTable make_table(const EmbedConfig& cfg, std::size_t vocab,
                              Rng& rng) {
  if (cfg.kind == dist::Kind::rown && cfg.flavor == dist::Flavor::full) {
    throw ContractError("make_table: rown has no full flavor");
  }
  if (vocab == 0 || cfg.dim == 0) {
    throw ContractError("make_table: empty table");
  }
  WordEmbeddingTable t;
  t.cfg = cfg;
  t.means = Matrix(vocab, cfg.dim);
  for (std::size_t i = 0; i < t.means.size(); ++i) {
    t.means.a[i] = rng.normal(0.0, cfg.init_std);
  }
  std::size_t k = t.cov_cols();
  if (cfg.flavor == dist::Flavor::full) {
    t.raws = Matrix(vocab, k);
    for (std::size_t i = 0; i < vocab; ++i) {
      for (std::size_t j = 0; j < cfg.dim; ++j) {
        t.raws(i, j * cfg.dim + j) = rng.normal(0.0, cfg.init_std);
      }
    }
  } else {
    t.raws = Matrix(vocab, k, kUnitRaw);
  }
  return t;
}

double embed_lr(const EmbedConfig& cfg, int epoch) {
  if (cfg.flavor == dist::Flavor::full) return cfg.lr_full;
  return epoch < cfg.burnin_epochs ? cfg.lr_burnin : cfg.lr_main;
}

dist::DiffDist TableBinder::rows(const std::vector<std::size_t>& ids) {
  if (ids.empty()) throw ContractError("TableBinder: empty row set");
  const std::size_t n = table_->cfg.dim;
  const std::size_t k = table_->cov_cols();
  Matrix mean(ids.size(), n);
  Matrix raw(ids.size(), k);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table_->vocab()) {
      throw ContractError("TableBinder: word id out of range");
    }
    mean.set_row(i, table_->means.row_vec(ids[i]));
    raw.set_row(i, table_->raws.row_vec(ids[i]));
  }
  Bound b;
  b.ids = ids;
  b.mean = tape_->leaf(std::move(mean));
  b.raw = tape_->leaf(std::move(raw));
  bound_.push_back(b);
  return dist::DiffDist{table_->cfg.kind, table_->cfg.flavor, n, b.mean,
                        b.raw};
}

void TableBinder::step(double lr, double clip_norm) {
  std::vector<Matrix> grads;
  grads.reserve(2 * bound_.size());
  for (const Bound& b : bound_) {
    grads.push_back(b.mean.grad());
    grads.push_back(b.raw.grad());
  }
  ad::clip_global_norm(grads, clip_norm);
  for (std::size_t bi = 0; bi < bound_.size(); ++bi) {
    const Bound& b = bound_[bi];
    const Matrix& gm = grads[2 * bi];
    const Matrix& gr = grads[2 * bi + 1];
    for (std::size_t i = 0; i < b.ids.size(); ++i) {
      std::size_t row = b.ids[i];
      for (std::size_t j = 0; j < gm.cols; ++j) {
        table_->means(row, j) -= lr * gm(i, j);
      }
      for (std::size_t j = 0; j < gr.cols; ++j) {
        table_->raws(row, j) -= lr * gr(i, j);
      }
    }
  }
}

ad::Var word_loss(TableBinder& binder, const WordEmbeddingTable& table,
                  const std::vector<Triple>& batch, int kl_samples,
                  Rng& noise_rng) {
  if (batch.empty()) throw ContractError("word_loss: empty batch");
  if (kl_samples < 1) throw ContractError("word_loss: kl_samples >= 1");
  ad::Var total{};
  bool first = true;
  const std::size_t n = table.cfg.dim;
  const std::size_t nc = dist::noise_cols(table.cfg.flavor, n);
  for (const Triple& tr : batch) {
    if (tr.negatives.empty()) {
      throw ContractError("word_loss: triple without negatives");
    }
    dist::DiffDist qs = binder.rows({tr.s});
    dist::DiffDist qt = binder.rows({tr.t});
    ad::Tape& t = *qs.mean.tape;
    ad::Var eps = t.constant(normal_noise(
        noise_rng, static_cast<std::size_t>(kl_samples), nc));
    ad::Var z = dist::sample_rows(qs, eps);
    ad::Var lq = dist::log_prob_rows(qs, z);
    ad::Var kl_t = ad::mean_all(ad::sub(lq, dist::log_prob_rows(qt, z)));
    ad::Var triple_loss{};
    if (kl_samples == 1) {
      // One shared sample row broadcasts against all negatives at once.
      dist::DiffDist qn = binder.rows(tr.negatives);
      ad::Var kl_n = ad::sub(lq, dist::log_prob_rows(qn, z));
      ad::Var hinge = ad::relu(
          ad::add_scalar(ad::sub(kl_t, kl_n), table.cfg.margin));
      triple_loss = ad::mean_all(hinge);
    } else {
      ad::Var sum{};
      for (std::size_t j = 0; j < tr.negatives.size(); ++j) {
        dist::DiffDist qn = binder.rows({tr.negatives[j]});
        ad::Var kl_n =
            ad::mean_all(ad::sub(lq, dist::log_prob_rows(qn, z)));
        ad::Var hinge = ad::relu(
            ad::add_scalar(ad::sub(kl_t, kl_n), table.cfg.margin));
        sum = j == 0 ? hinge : ad::add(sum, hinge);
      }
      triple_loss =
          ad::scale(sum, 1.0 / static_cast<double>(tr.negatives.size()));
    }
    total = first ? triple_loss : ad::add(total, triple_loss);
    first = false;
  }
  return ad::scale(total, 1.0 / static_cast<double>(batch.size()));
}

EmbedRun train_embeddings(const EmbedConfig& cfg,
                          const data::HypernymyGraph& graph) {
  if (graph.n_edges() == 0) {
    throw ContractError("train_embeddings: graph has no edges");
  }
  Rng root(cfg.seed);
  Rng init_rng = root.fork(1);
  Rng shuffle_rng = root.fork(2);
  Rng neg_rng = root.fork(3);
  Rng noise_rng = root.fork(4);

  EmbedRun run{make_table(cfg, graph.n_words(), init_rng), {}};
  WordEmbeddingTable& table = run.table;
  Matrix good_means = table.means;
  Matrix good_raws = table.raws;

  std::vector<std::size_t> order(graph.n_edges());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double lr = embed_lr(cfg, epoch);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    bool bad = false;
    for (std::size_t e : order) {
      std::size_t s = graph.edges[e].first;
      std::size_t tgt = graph.edges[e].second;
      std::vector<std::size_t> negs =
          data::negative_sample(graph, s, cfg.negatives, neg_rng);
      if (negs.empty()) continue;
      try {
        ad::Tape tape;
        TableBinder binder(tape, table);
        Triple tr{s, tgt, negs};
        ad::Var loss =
            word_loss(binder, table, {tr}, cfg.kl_samples, noise_rng);
        tape.backward(loss);
        binder.step(lr, cfg.clip_norm);
        loss_sum += loss.value()(0, 0);
        ++steps;
      } catch (const NumericError&) {
        bad = true;
        break;
      }
    }
    if (bad) {
      table.means = good_means;
      table.raws = good_raws;
      table.diverged = true;
      break;
    }
    EmbedEpoch rec;
    rec.epoch = epoch;
    rec.mean_loss = steps ? loss_sum / static_cast<double>(steps) : 0.0;
    rec.lr = lr;
    run.history.push_back(rec);
    good_means = table.means;
    good_raws = table.raws;
  }
  return run;
}

// ---------------------------------------------------------------------
// Checkpoint I/O.

namespace {

const char kMagic[4] = {'H', 'Y', 'P', 'R'};
const std::uint32_t kVersion = 1;

void put_u8(std::ostream& os, unsigned char v) {
  os.put(static_cast<char>(v));
}

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_matrix(std::ostream& os, const Matrix& m) {
  put_u32(os, static_cast<std::uint32_t>(m.rows));
  put_u32(os, static_cast<std::uint32_t>(m.cols));
  os.write(reinterpret_cast<const char*>(m.a.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}

unsigned char get_u8(std::istream& is, const std::string& path) {
  int c = is.get();
  if (c == EOF) throw IoError("checkpoint truncated: " + path);
  return static_cast<unsigned char>(c);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw IoError("checkpoint truncated: " + path);
  }
  return v;
}

double get_f64(std::istream& is, const std::string& path) {
  double v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw IoError("checkpoint truncated: " + path);
  }
  return v;
}

Matrix get_matrix(std::istream& is, const std::string& path) {
  std::uint32_t r = get_u32(is, path);
  std::uint32_t c = get_u32(is, path);
  Matrix m(r, c);
  if (!is.read(reinterpret_cast<char*>(m.a.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)))) {
    throw IoError("checkpoint truncated: " + path);
  }
  return m;
}

void put_header(std::ostream& os, CheckpointType type, dist::Kind kind,
                dist::Flavor flavor) {
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u8(os, static_cast<unsigned char>(type));
  put_u8(os, static_cast<unsigned char>(kind));
  put_u8(os, static_cast<unsigned char>(flavor));
}

struct Header {
  CheckpointType type;
  dist::Kind kind;
  dist::Flavor flavor;
};

Header get_header(std::istream& is, const std::string& path) {
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a checkpoint file: " + path);
  }
  std::uint32_t version = get_u32(is, path);
  if (version != kVersion) {
    throw IoError("unsupported checkpoint version " +
                  std::to_string(version) + ": " + path);
  }
  Header h;
  unsigned char type = get_u8(is, path);
  if (type > 1) throw IoError("unknown checkpoint type: " + path);
  h.type = static_cast<CheckpointType>(type);
  unsigned char kind = get_u8(is, path);
  if (kind > 2) throw IoError("unknown distribution kind: " + path);
  h.kind = static_cast<dist::Kind>(kind);
  unsigned char flavor = get_u8(is, path);
  if (flavor > 2) throw IoError("unknown covariance flavor: " + path);
  h.flavor = static_cast<dist::Flavor>(flavor);
  return h;
}

void put_mlp(std::ostream& os, const Mlp& m) {
  put_u32(os, static_cast<std::uint32_t>(m.w.size()));
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    put_matrix(os, m.w[l]);
    put_matrix(os, m.b[l]);
  }
}

Mlp get_mlp(std::istream& is, const std::string& path) {
  std::uint32_t layers = get_u32(is, path);
  if (layers == 0 || layers > 64) {
    throw IoError("implausible layer count in checkpoint: " + path);
  }
  Mlp m;
  for (std::uint32_t l = 0; l < layers; ++l) {
    m.w.push_back(get_matrix(is, path));
    m.b.push_back(get_matrix(is, path));
  }
  return m;
}

}  // namespace

CheckpointType peek_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  return get_header(is, path).type;
}

void save_vae(const MlpVae& vae, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  put_header(os, CheckpointType::vae, vae.cfg.kind, vae.cfg.flavor);
  put_u32(os, static_cast<std::uint32_t>(vae.cfg.input_dim));
  put_u32(os, static_cast<std::uint32_t>(vae.cfg.latent_dim));
  put_u32(os, static_cast<std::uint32_t>(vae.cfg.hidden));
  put_f64(os, vae.cfg.sigma_obs);
  put_u8(os, vae.diverged ? 1 : 0);
  put_mlp(os, vae.encoder);
  put_mlp(os, vae.decoder);
  if (!os) throw IoError("checkpoint write failed: " + path);
}

MlpVae load_vae(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  Header h = get_header(is, path);
  if (h.type != CheckpointType::vae) {
    throw IoError("checkpoint does not hold a VAE: " + path);
  }
  MlpVae vae;
  vae.cfg.kind = h.kind;
  vae.cfg.flavor = h.flavor;
  vae.cfg.input_dim = get_u32(is, path);
  vae.cfg.latent_dim = get_u32(is, path);
  vae.cfg.hidden = get_u32(is, path);
  vae.cfg.sigma_obs = get_f64(is, path);
  vae.diverged = get_u8(is, path) != 0;
  vae.encoder = get_mlp(is, path);
  vae.decoder = get_mlp(is, path);
  return vae;
}

void save_table(const WordEmbeddingTable& table,
                const std::vector<std::string>& words,
                const std::string& path) {
  if (words.size() != table.vocab()) {
    throw ContractError("save_table: vocabulary size mismatch");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  put_header(os, CheckpointType::embed, table.cfg.kind, table.cfg.flavor);
  put_u32(os, static_cast<std::uint32_t>(table.vocab()));
  put_u32(os, static_cast<std::uint32_t>(table.cfg.dim));
  put_f64(os, table.cfg.margin);
  put_u8(os, table.diverged ? 1 : 0);
  for (const std::string& w : words) {
    put_u32(os, static_cast<std::uint32_t>(w.size()));
    os.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  put_matrix(os, table.means);
  put_matrix(os, table.raws);
  if (!os) throw IoError("checkpoint write failed: " + path);
}

LoadedTable load_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  Header h = get_header(is, path);
  if (h.type != CheckpointType::embed) {
    throw IoError("checkpoint does not hold an embedding table: " + path);
  }
  LoadedTable out;
  out.table.cfg.kind = h.kind;
  out.table.cfg.flavor = h.flavor;
  std::uint32_t vocab = get_u32(is, path);
  out.table.cfg.dim = get_u32(is, path);
  out.table.cfg.margin = get_f64(is, path);
  out.table.diverged = get_u8(is, path) != 0;
  out.words.reserve(vocab);
  for (std::uint32_t i = 0; i < vocab; ++i) {
    std::uint32_t len = get_u32(is, path);
    if (len > (1u << 20)) {
      throw IoError("implausible word length in checkpoint: " + path);
    }
    std::string w(len, '\0');
    if (len && !is.read(w.data(), len)) {
      throw IoError("checkpoint truncated: " + path);
    }
    out.words.push_back(std::move(w));
  }
  out.table.means = get_matrix(is, path);
  out.table.raws = get_matrix(is, path);
  if (out.table.means.rows != vocab ||
      out.table.means.cols != out.table.cfg.dim ||
      out.table.raws.rows != vocab ||
      out.table.raws.cols != out.table.cov_cols()) {
    throw IoError("checkpoint arrays inconsistent with header: " + path);
  }
  return out;
}

}  // namespace hyprown::models
