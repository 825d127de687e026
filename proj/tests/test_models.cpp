#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hyprown/common.hpp"
#include "hyprown/datasets.hpp"
#include "hyprown/geometry.hpp"
#include "hyprown/models.hpp"

using namespace hyprown;
namespace models = hyprown::models;
namespace data = hyprown::data;
namespace fs = std::filesystem;

namespace {

// softplus(raw) = 1
const double kUnitRaw = 0.5413248546129181;

void zero_mlp(models::Mlp& m) {
  for (Matrix& w : m.w) w = Matrix(w.rows, w.cols);
  for (Matrix& b : m.b) b = Matrix(b.rows, b.cols);
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("hyprown_models_" + name);
}

}  // namespace

TEST_CASE("default_vae_config derives dimensions from the tree depth") {
  models::VaeConfig c = models::default_vae_config(4);
  CHECK(c.input_dim == 15);
  CHECK(c.latent_dim == 4);
  CHECK(c.hidden == 128);
  models::VaeConfig c3 = models::default_vae_config(3);
  CHECK(c3.input_dim == 7);
  CHECK(c3.hidden == 64);
  CHECK_THROWS_AS(models::default_vae_config(0), ContractError);
}

TEST_CASE("make_mlp shapes, zero biases, bounded weights") {
  Rng rng(3);
  models::Mlp m = models::make_mlp({3, 5, 2}, rng);
  REQUIRE(m.w.size() == 2);
  REQUIRE(m.b.size() == 2);
  CHECK(m.w[0].rows == 3);
  CHECK(m.w[0].cols == 5);
  CHECK(m.w[1].rows == 5);
  CHECK(m.w[1].cols == 2);
  CHECK(m.b[0].cols == 5);
  CHECK(m.b[1].cols == 2);
  for (const Matrix& b : m.b) {
    for (double v : b.a) CHECK(v == 0.0);
  }
  double lim0 = std::sqrt(6.0 / (3 + 5));
  for (double v : m.w[0].a) {
    CHECK(std::fabs(v) <= lim0);
  }
  bool nonzero = false;
  for (double v : m.w[0].a) nonzero = nonzero || v != 0.0;
  CHECK(nonzero);

  Rng rng2(3);
  models::Mlp m2 = models::make_mlp({3, 5, 2}, rng2);
  CHECK(m2.w[0].a == m.w[0].a);
}

TEST_CASE("mlp_forward applies relu on hidden layers only") {
  models::Mlp m;
  m.w.push_back(Matrix(1, 2));
  m.w[0](0, 0) = 1.0;
  m.w[0](0, 1) = -1.0;
  m.b.push_back(Matrix(1, 2));
  m.w.push_back(Matrix(2, 1));
  m.w[1](0, 0) = 1.0;
  m.w[1](1, 0) = 1.0;
  m.b.push_back(Matrix(1, 1, 0.25));
  Matrix x(2, 1);
  x(0, 0) = 3.0;
  x(1, 0) = -2.0;
  Matrix y = models::mlp_forward(m, x);
  // row 1: hidden = relu([3,-3]) = [3,0] -> 3 + 0.25
  CHECK(y(0, 0) == doctest::Approx(3.25).epsilon(1e-15));
  // row 2: hidden = relu([-2,2]) = [0,2] -> 2 + 0.25 (no relu after output)
  CHECK(y(1, 0) == doctest::Approx(2.25).epsilon(1e-15));

  Matrix bad(1, 3);
  CHECK_THROWS_AS(models::mlp_forward(m, bad), DimensionError);
}

TEST_CASE("make_vae lays out encoder and decoder heads per flavor") {
  Rng rng(1);
  models::VaeConfig cfg;
  cfg.input_dim = 7;
  cfg.latent_dim = 3;
  cfg.hidden = 8;
  cfg.flavor = dist::Flavor::diagonal;
  models::MlpVae v = models::make_vae(cfg, rng);
  CHECK(v.cov_cols() == 3);
  CHECK(v.encoder.w.back().cols == 6);  // mean + diag head
  CHECK(v.decoder.w.back().cols == 7);
  CHECK(v.decoder.w.front().rows == 3);

  cfg.flavor = dist::Flavor::isotropic;
  models::MlpVae vi = models::make_vae(cfg, rng);
  CHECK(vi.cov_cols() == 3);  // shares the diagonal head, averaged later
  CHECK(vi.encoder.w.back().cols == 6);

  cfg.flavor = dist::Flavor::full;
  cfg.kind = dist::Kind::hwn;
  models::MlpVae vf = models::make_vae(cfg, rng);
  CHECK(vf.cov_cols() == 9);
  CHECK(vf.encoder.w.back().cols == 12);

  cfg.kind = dist::Kind::rown;
  CHECK_THROWS_AS(models::make_vae(cfg, rng), ContractError);
}

TEST_CASE("param binding exposes gradients for bound matrices") {
  Matrix w(2, 2);
  w.set_row(0, {1.0, -2.0});
  w.set_row(1, {0.5, 3.0});
  ad::Tape t;
  models::ParamBind bind(t);
  ad::Var v = bind.bind(w);
  t.backward(ad::sum_all(ad::square(v)));
  std::vector<Matrix> gs = bind.grads();
  REQUIRE(gs.size() == 1);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(gs[0].a[i] == doctest::Approx(2.0 * w.a[i]).epsilon(1e-15));
  }
  CHECK(bind.params()[0] == &w);
}

TEST_CASE("elbo closed form: prior posterior and perfect reconstruction") {
  // Encoder emits exactly the prior parameters; decoder emits the data.
  // The KL term then vanishes and the ELBO is the Gaussian log-likelihood
  // at zero error: -D/2 log(2 pi sigma^2) = 25.80362156948393 for D = 7,
  // sigma = 0.01.
  for (dist::Kind kind :
       {dist::Kind::hwn, dist::Kind::rown, dist::Kind::euclidean}) {
    models::VaeConfig cfg;
    cfg.kind = kind;
    cfg.flavor = dist::Flavor::diagonal;
    cfg.input_dim = 7;
    cfg.latent_dim = 2;
    cfg.hidden = 4;
    cfg.sigma_obs = 0.01;
    Rng rng(11);
    models::MlpVae vae = models::make_vae(cfg, rng);
    zero_mlp(vae.encoder);
    zero_mlp(vae.decoder);
    Matrix& enc_b = vae.encoder.b.back();
    enc_b(0, 2) = kUnitRaw;
    enc_b(0, 3) = kUnitRaw;
    Matrix batch(1, 7);
    batch.set_row(0, {0.3, -0.2, 0.8, 0.0, 1.0, -0.5, 0.25});
    vae.decoder.b.back().set_row(0, batch.row_vec(0));

    ad::Tape t;
    models::ParamBind bind(t);
    Rng noise(77);
    ad::Var e = models::elbo(bind, vae, batch, 3, noise);
    INFO("kind " << dist::kind_name(kind));
    CHECK(e.value()(0, 0) ==
          doctest::Approx(25.80362156948393).epsilon(1e-10));
  }
}

TEST_CASE("elbo validates its inputs") {
  models::VaeConfig cfg;
  cfg.input_dim = 7;
  cfg.latent_dim = 2;
  cfg.hidden = 4;
  Rng rng(1);
  models::MlpVae vae = models::make_vae(cfg, rng);
  ad::Tape t;
  models::ParamBind bind(t);
  Rng noise(2);
  Matrix bad(1, 7);
  bad(0, 3) = std::nan("");
  CHECK_THROWS_AS(models::elbo(bind, vae, bad, 1, noise), NumericError);
  Matrix wrong(1, 6);
  CHECK_THROWS_AS(models::elbo(bind, vae, wrong, 1, noise), DimensionError);
  Matrix ok(1, 7);
  CHECK_THROWS_AS(models::elbo(bind, vae, ok, 0, noise), ContractError);
}

TEST_CASE("train_vae is deterministic and improves the held-out elbo") {
  data::TreeDataset ds = data::make_tree_dataset(3, 20, 0.7853981633974483,
                                                 0.2, 5);
  models::VaeConfig cfg = models::default_vae_config(3);
  cfg.kind = dist::Kind::rown;
  cfg.epochs = 40;
  cfg.seed = 1;
  models::VaeRun run = models::train_vae(cfg, ds);
  REQUIRE(run.history.size() == 40);
  CHECK_FALSE(run.vae.diverged);
  CHECK(run.history.back().test_elbo > run.history.front().test_elbo);
  CHECK(run.history.back().train_elbo > run.history.front().train_elbo);

  models::VaeRun rerun = models::train_vae(cfg, ds);
  for (std::size_t i = 0; i < run.history.size(); ++i) {
    CHECK(run.history[i].train_elbo == rerun.history[i].train_elbo);
    CHECK(run.history[i].test_elbo == rerun.history[i].test_elbo);
  }
  for (std::size_t li = 0; li < run.vae.encoder.w.size(); ++li) {
    CHECK(run.vae.encoder.w[li].a == rerun.vae.encoder.w[li].a);
  }

  // latents: one Lorentz row per input row
  Matrix x(3, 7);
  for (std::size_t i = 0; i < x.size(); ++i) x.a[i] = 0.1 * (i % 5);
  Matrix lat = models::encode_latents(run.vae, x);
  REQUIRE(lat.rows == 3);
  REQUIRE(lat.cols == 4);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(geo::lorentz_inner(lat.row_vec(i), lat.row_vec(i)) ==
          doctest::Approx(-1.0).epsilon(1e-9));
  }
  Matrix mp = models::encode_mean_params(run.vae, x);
  CHECK(mp.rows == 3);
  CHECK(mp.cols == 3);

  Rng e1(9), e2(9);
  double a = models::eval_elbo(run.vae, x, 2, e1);
  double b = models::eval_elbo(run.vae, x, 2, e2);
  CHECK(a == b);
}

TEST_CASE("euclidean vae trains and encodes flat latents") {
  data::TreeDataset ds = data::make_tree_dataset(3, 10, 0.5, 0.2, 6);
  models::VaeConfig cfg = models::default_vae_config(3);
  cfg.kind = dist::Kind::euclidean;
  cfg.epochs = 15;
  cfg.seed = 2;
  models::VaeRun run = models::train_vae(cfg, ds);
  CHECK(run.history.back().test_elbo > run.history.front().test_elbo);
  Matrix x(2, 7);
  Matrix lat = models::encode_latents(run.vae, x);
  CHECK(lat.cols == 3);
}

TEST_CASE("embed_lr schedule") {
  models::EmbedConfig cfg;
  cfg.burnin_epochs = 10;
  cfg.lr_burnin = 0.015;
  cfg.lr_main = 0.6;
  cfg.lr_full = 0.01;
  CHECK(models::embed_lr(cfg, 0) == 0.015);
  CHECK(models::embed_lr(cfg, 9) == 0.015);
  CHECK(models::embed_lr(cfg, 10) == 0.6);
  CHECK(models::embed_lr(cfg, 250) == 0.6);
  cfg.flavor = dist::Flavor::full;
  CHECK(models::embed_lr(cfg, 0) == 0.01);
  CHECK(models::embed_lr(cfg, 200) == 0.01);
}

TEST_CASE("make_table initializes tight means and unit covariances") {
  models::EmbedConfig cfg;
  cfg.dim = 6;
  cfg.init_std = 0.1;
  Rng rng(8);
  models::WordEmbeddingTable t = models::make_table(cfg, 400, rng);
  CHECK(t.vocab() == 400);
  CHECK(t.cov_cols() == 6);
  double sum = 0.0, sumsq = 0.0;
  for (double v : t.means.a) {
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / t.means.size();
  double sd = std::sqrt(sumsq / t.means.size() - mean * mean);
  CHECK(std::fabs(mean) < 0.01);
  CHECK(sd == doctest::Approx(0.1).epsilon(0.1));
  for (double v : t.raws.a) CHECK(v == kUnitRaw);

  // word_dist realizes unit variances at init
  Vec sd0 = t.word_dist(0).sigma_diag();
  for (double v : sd0) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  cfg.flavor = dist::Flavor::full;
  cfg.kind = dist::Kind::hwn;
  Rng rng2(8);
  models::WordEmbeddingTable tf = models::make_table(cfg, 10, rng2);
  CHECK(tf.cov_cols() == 36);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t c = 0; c < 6; ++c) {
        if (r != c) CHECK(tf.raws(i, r * 6 + c) == 0.0);
      }
    }
  }

  cfg.kind = dist::Kind::rown;
  CHECK_THROWS_AS(models::make_table(cfg, 10, rng2), ContractError);
}

TEST_CASE("word_loss equals the margin when target and negative coincide") {
  models::EmbedConfig cfg;
  cfg.dim = 3;
  cfg.margin = 1.0;
  Rng rng(4);
  models::WordEmbeddingTable table = models::make_table(cfg, 5, rng);
  for (int s : {1, 3}) {
    ad::Tape t;
    models::TableBinder binder(t, table);
    models::Triple tr{static_cast<std::size_t>(s), 2, {2}};
    Rng noise(9);
    ad::Var loss = models::word_loss(binder, table, {tr}, s, noise);
    CHECK(loss.value()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("word_loss decreases under binder steps") {
  models::EmbedConfig cfg;
  cfg.dim = 2;
  cfg.margin = 1.0;
  Rng rng(12);
  models::WordEmbeddingTable table = models::make_table(cfg, 4, rng);
  models::Triple tr{0, 1, {2, 3}};
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 60; ++it) {
    ad::Tape t;
    models::TableBinder binder(t, table);
    Rng noise(100 + it);
    ad::Var loss = models::word_loss(binder, table, {tr}, 1, noise);
    if (it == 0) first = loss.value()(0, 0);
    last = loss.value()(0, 0);
    t.backward(loss);
    binder.step(0.05, 10.0);
  }
  CHECK(last < first);
}

TEST_CASE("binder step applies clipped row updates with accumulation") {
  models::EmbedConfig cfg;
  cfg.dim = 2;
  Rng rng(5);
  models::WordEmbeddingTable table = models::make_table(cfg, 3, rng);
  Matrix before_means = table.means;
  Matrix before_raws = table.raws;

  ad::Tape t;
  models::TableBinder binder(t, table);
  dist::DiffDist a = binder.rows({0});
  dist::DiffDist b = binder.rows({0});  // same row bound twice
  ad::Var loss =
      ad::add(ad::sum_all(ad::square(a.mean)), ad::sum_all(ad::square(b.mean)));
  t.backward(loss);
  binder.step(0.1, 1e9);
  // each binding contributes 2*m: row 0 moves by -0.1 * 4m
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(table.means(0, j) ==
          doctest::Approx(before_means(0, j) * (1.0 - 0.4)).epsilon(1e-12));
    CHECK(table.means(1, j) == before_means(1, j));
    CHECK(table.means(2, j) == before_means(2, j));
  }
  for (std::size_t i = 0; i < before_raws.size(); ++i) {
    CHECK(table.raws.a[i] == before_raws.a[i]);  // loss ignored covariances
  }

  // a tiny clip cap rescales the whole update
  Matrix m2 = table.means;
  ad::Tape t2;
  models::TableBinder binder2(t2, table);
  dist::DiffDist c = binder2.rows({1});
  t2.backward(ad::sum_all(ad::square(c.mean)));
  Vec g{2.0 * m2(1, 0), 2.0 * m2(1, 1)};
  double gn = norm2(g);
  binder2.step(1.0, gn / 2.0);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(table.means(1, j) ==
          doctest::Approx(m2(1, j) - g[j] / 2.0).epsilon(1e-10));
  }
}

TEST_CASE("train_embeddings runs deterministically and learns the toy tree") {
  data::HypernymyGraph g = data::graph_from_edges(
      data::binary_tree_parent_edges(3), true);
  models::EmbedConfig cfg;
  cfg.kind = dist::Kind::rown;
  cfg.dim = 2;
  cfg.epochs = 30;
  cfg.burnin_epochs = 10;
  cfg.negatives = 3;
  cfg.lr_main = 0.1;
  cfg.seed = 7;
  models::EmbedRun run = models::train_embeddings(cfg, g);
  REQUIRE(run.history.size() == 30);
  CHECK_FALSE(run.table.diverged);
  CHECK(run.history.back().mean_loss < run.history.front().mean_loss);
  CHECK(run.history.front().lr == 0.015);
  CHECK(run.history.back().lr == 0.1);

  models::EmbedRun rerun = models::train_embeddings(cfg, g);
  CHECK(run.table.means.a == rerun.table.means.a);
  CHECK(run.table.raws.a == rerun.table.raws.a);

  data::HypernymyGraph empty;
  CHECK_THROWS_AS(models::train_embeddings(cfg, empty), ContractError);
}

TEST_CASE("vae checkpoints round trip bitwise") {
  data::TreeDataset ds = data::make_tree_dataset(3, 5, 0.5, 0.2, 3);
  models::VaeConfig cfg = models::default_vae_config(3);
  cfg.epochs = 3;
  cfg.kind = dist::Kind::hwn;
  cfg.flavor = dist::Flavor::full;
  models::VaeRun run = models::train_vae(cfg, ds);
  fs::path path = temp_file("vae.bin");
  models::save_vae(run.vae, path.string());
  CHECK(models::peek_checkpoint(path.string()) ==
        models::CheckpointType::vae);
  models::MlpVae back = models::load_vae(path.string());
  CHECK(back.cfg.kind == run.vae.cfg.kind);
  CHECK(back.cfg.flavor == run.vae.cfg.flavor);
  CHECK(back.cfg.input_dim == run.vae.cfg.input_dim);
  CHECK(back.cfg.latent_dim == run.vae.cfg.latent_dim);
  CHECK(back.cfg.hidden == run.vae.cfg.hidden);
  CHECK(back.cfg.sigma_obs == run.vae.cfg.sigma_obs);
  CHECK(back.diverged == run.vae.diverged);
  REQUIRE(back.encoder.w.size() == run.vae.encoder.w.size());
  for (std::size_t i = 0; i < back.encoder.w.size(); ++i) {
    CHECK(back.encoder.w[i].a == run.vae.encoder.w[i].a);
    CHECK(back.encoder.b[i].a == run.vae.encoder.b[i].a);
  }
  for (std::size_t i = 0; i < back.decoder.w.size(); ++i) {
    CHECK(back.decoder.w[i].a == run.vae.decoder.w[i].a);
  }
  fs::remove(path);
}

TEST_CASE("embedding checkpoints round trip with the vocabulary") {
  models::EmbedConfig cfg;
  cfg.dim = 3;
  cfg.kind = dist::Kind::rown;
  Rng rng(2);
  models::WordEmbeddingTable table = models::make_table(cfg, 4, rng);
  std::vector<std::string> words{"root", "left", "right", "leaf"};
  fs::path path = temp_file("embed.bin");
  models::save_table(table, words, path.string());
  CHECK(models::peek_checkpoint(path.string()) ==
        models::CheckpointType::embed);
  models::LoadedTable back = models::load_table(path.string());
  CHECK(back.words == words);
  CHECK(back.table.means.a == table.means.a);
  CHECK(back.table.raws.a == table.raws.a);
  CHECK(back.table.cfg.dim == 3);
  CHECK(back.table.cfg.margin == cfg.margin);
  CHECK(back.table.diverged == table.diverged);

  CHECK_THROWS_AS(models::load_vae(path.string()), IoError);  // wrong type
  fs::remove(path);
}

TEST_CASE("checkpoint loading rejects damaged files") {
  fs::path path = temp_file("garbage.bin");
  std::ofstream f(path, std::ios::binary);
  f << "not a checkpoint at all";
  f.close();
  CHECK_THROWS_AS(models::peek_checkpoint(path.string()), IoError);
  CHECK_THROWS_AS(models::load_vae(path.string()), IoError);
  fs::remove(path);
  CHECK_THROWS_AS(models::peek_checkpoint(path.string()), IoError);
}
