#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hyprown/datasets.hpp"
#include "hyprown/models.hpp"

using namespace hyprown;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path cap = fs::temp_directory_path() /
                 ("hyprown_cli_out_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++) + ".txt");
  std::string cmd = std::string("\"") + HYPROWN_CLI_PATH + "\" " + args +
                    " > " + cap.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(cap);
  fs::remove(cap);
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("hyprown_cli_dir_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli rejects bad invocations with the usage exit code") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("gen-tree --no-such-flag 1").code == 2);
  CHECK(run_cli("train --parallel 0 --experiment embed --depth 2").code == 2);
  CHECK(run_cli("train --experiment bogus").code == 2);
  CHECK(run_cli("eval").code == 2);  // needs --run or checkpoint + data
}

TEST_CASE("gen-tree writes the dataset, metadata and edge list") {
  TempDir td;
  std::string csv = td.file("tree.csv");
  std::string edges = td.file("edges.tsv");
  CliResult r = run_cli("gen-tree --depth 3 --samples-per-node 4 --seed 5 "
                        "--out " + csv + " --edges " + edges);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "wrote"));
  data::TreeDataset ds = data::read_tree_csv(csv);
  CHECK(ds.input_dim() == 7);
  CHECK(!ds.samples.empty());
  std::string meta = slurp(td.file("tree.json"));
  CHECK(contains(meta, "\"depth\": 3"));
  data::HypernymyGraph g = data::load_hypernymy(edges, false);
  CHECK(g.n_words() == 7);
  CHECK(g.n_edges() == 6);

  CHECK(run_cli("gen-tree --depth 0 --out " + td.file("bad.csv")).code == 2);
}

TEST_CASE("train embed produces the run layout and eval consumes it") {
  TempDir td;
  std::string run = td.file("run");
  std::string base =
      "train --experiment embed --kind rown --flavor diagonal --dim 3 "
      "--depth 3 --transitive-closure true --epochs 8 --burnin-epochs 4 "
      "--negatives 2 --seeds 1,2 ";
  CliResult r = run_cli(base + "--out " + run);
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "\"mean_rank\""));

  fs::path rd(run);
  for (const char* f :
       {"config.cfg", "config.json", "edges.tsv", "report.json"}) {
    INFO(f);
    CHECK(fs::exists(rd / f));
  }
  for (const char* seed : {"seed1", "seed2"}) {
    for (const char* f : {"config.cfg", "config.json", "history.jsonl",
                          "checkpoint.bin", "metrics.json"}) {
      INFO(seed << "/" << f);
      CHECK(fs::exists(rd / seed / f));
    }
  }
  CHECK(count_lines(slurp(rd / "seed1" / "history.jsonl")) == 8);
  std::string report = slurp(rd / "report.json");
  CHECK(contains(report, "\"mean_rank\""));
  CHECK(contains(report, "\"map\""));
  CHECK(contains(report, "\"root_norm\""));
  CHECK(contains(report, "\"mean\""));
  CHECK(contains(slurp(rd / "config.json"), "\"experiment\": \"embed\""));

  // forked seeds reproduce the serial run exactly
  std::string prun = td.file("prun");
  CliResult rp = run_cli(base + "--parallel 2 --out " + prun);
  REQUIRE(rp.code == 0);
  for (const char* seed : {"seed1", "seed2"}) {
    CHECK(slurp(fs::path(prun) / seed / "metrics.json") ==
          slurp(rd / seed / "metrics.json"));
  }
  CHECK(slurp(fs::path(prun) / "report.json") == report);

  // eval --run picks the first seed's checkpoint
  std::string mfile = td.file("metrics_eval.json");
  CliResult re = run_cli("eval --run " + run + " --out " + mfile);
  CHECK(re.code == 0);
  CHECK(contains(slurp(mfile), "\"mean_rank\""));

  // explicit checkpoint + data, ranking by KL
  CliResult rk = run_cli("eval --checkpoint " + run +
                         "/seed1/checkpoint.bin --data " + run +
                         "/edges.tsv --transitive-closure --kl-rank "
                         "--kl-samples 4 --seed 3");
  CHECK(rk.code == 0);
  CHECK(contains(rk.out, "\"map\""));

  // vocabulary mismatch is a config error
  std::string other = td.file("other.tsv");
  data::write_edge_tsv(data::binary_tree_parent_edges(2), other);
  CHECK(run_cli("eval --checkpoint " + run + "/seed1/checkpoint.bin --data " +
                other).code == 2);

  // dim-3 exports need an explicit projection
  std::string plot = td.file("plot.csv");
  CHECK(run_cli("eval --run " + run + " --export-poincare " + plot).code == 2);
  CliResult rr = run_cli("eval --run " + run + " --export-poincare " + plot +
                         " --project pca");
  CHECK(rr.code == 0);
  std::string pcsv = slurp(plot);
  CHECK(contains(pcsv, "word,p_1,p_2"));
  CHECK(count_lines(pcsv) == 8);  // header + 7 words

  // export subcommand: poincare coordinates per word
  std::string emb = td.file("emb.csv");
  CliResult rx =
      run_cli("export --checkpoint " + run + "/seed1/checkpoint.bin --out " +
              emb);
  CHECK(rx.code == 0);
  std::string ecsv = slurp(emb);
  CHECK(contains(ecsv, "word,poincare_norm,x_1,x_2,x_3"));
  CHECK(count_lines(ecsv) == 8);
  CHECK(contains(ecsv, "\nn0,"));
}

TEST_CASE("train tree-vae materializes the dataset and reports correlations") {
  TempDir td;
  std::string run = td.file("vrun");
  CliResult r = run_cli(
      "train --experiment tree-vae --kind hwn --flavor diagonal --depth 3 "
      "--samples-per-node 6 --epochs 5 --seeds 3 --out " + run);
  REQUIRE(r.code == 0);
  fs::path rd(run);
  CHECK(fs::exists(rd / "dataset.csv"));
  CHECK(fs::exists(rd / "dataset.json"));
  CHECK(fs::exists(rd / "seed3" / "checkpoint.bin"));
  std::string report = slurp(rd / "report.json");
  CHECK(contains(report, "\"r_distance\""));
  CHECK(contains(report, "\"r_depth\""));
  CHECK(contains(report, "\"test_elbo\""));

  models::MlpVae vae =
      models::load_vae((rd / "seed3" / "checkpoint.bin").string());
  CHECK(vae.cfg.input_dim == 7);

  // reuse the materialized dataset through eval
  CliResult re = run_cli("eval --run " + run);
  CHECK(re.code == 0);
  CHECK(contains(re.out, "\"r_distance\""));

  // a 2-d export goes straight to poincare coordinates
  std::string plot = td.file("vplot.csv");
  std::string run2 = td.file("vrun2");
  CliResult r2 = run_cli(
      "train --experiment tree-vae --kind rown --depth 3 --latent-dim 2 "
      "--samples-per-node 6 --epochs 4 --seeds 1 --out " + run2);
  REQUIRE(r2.code == 0);
  CliResult rp = run_cli("eval --run " + run2 + " --export-poincare " + plot);
  CHECK(rp.code == 0);
  CHECK(contains(slurp(plot), "base_node,depth,p_1,p_2"));
}

TEST_CASE("config files feed train and flags override them") {
  TempDir td;
  std::string cfg = td.file("run.cfg");
  std::string run = td.file("crun");
  {
    std::ofstream f(cfg);
    f << "# toy embedding run\n"
      << "experiment = embed\n"
      << "kind = hwn\n"
      << "dim = 2\n"
      << "depth = 3\n"
      << "transitive_closure = true\n"
      << "epochs = 3\n"
      << "negatives = 2\n"
      << "seeds = 7\n"
      << "out = " << run << "\n";
  }
  CliResult r = run_cli("train --config " + cfg + " --epochs 4");
  REQUIRE(r.code == 0);
  std::string echoed = slurp(fs::path(run) / "config.json");
  CHECK(contains(echoed, "\"epochs\": 4"));
  CHECK(contains(echoed, "\"kind\": \"hwn\""));
  CHECK(count_lines(slurp(fs::path(run) / "seed7" / "history.jsonl")) == 4);

  CHECK(run_cli("train --config " + td.file("missing.cfg")).code == 4);
}

TEST_CASE("io failures use their own exit code") {
  TempDir td;
  CHECK(run_cli("export --checkpoint " + td.file("nope.bin") + " --out " +
                td.file("e.csv")).code == 4);
  CHECK(run_cli("train --experiment tree-vae --data " + td.file("no.csv") +
                " --epochs 1 --out " + td.file("r")).code == 4);
  // eval catches the missing checkpoint before opening it
  CHECK(run_cli("eval --checkpoint " + td.file("nope.bin") + " --data " +
                td.file("no.tsv")).code == 2);
}

TEST_CASE("a runaway learning rate surfaces as a numeric failure") {
  TempDir td;
  std::string run = td.file("diverge");
  CliResult r = run_cli(
      "train --experiment embed --kind rown --dim 2 --depth 3 "
      "--transitive-closure true --epochs 3 --burnin-epochs 0 "
      "--lr-main 1e8 --negatives 2 --seeds 1 --out " + run);
  CHECK(r.code == 3);
  CHECK(contains(slurp(fs::path(run) / "report.json"), "\"diverged\""));
}

TEST_CASE("export rejects vae checkpoints") {
  TempDir td;
  std::string run = td.file("vrun");
  CliResult r = run_cli(
      "train --experiment tree-vae --kind euclidean --depth 3 "
      "--samples-per-node 4 --epochs 2 --seeds 1 --out " + run);
  REQUIRE(r.code == 0);
  CHECK(run_cli("export --checkpoint " + run + "/seed1/checkpoint.bin --out " +
                td.file("x.csv")).code == 2);
}
