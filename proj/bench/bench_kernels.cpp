// Wall-clock comparison of the OpenMP metric kernels against their
// serial reference implementations, with an equality check on the
// results. Run from the build tree: ./bench/bench_kernels

#include <chrono>
#include <cstdio>
#include <vector>

#include "hyprown/datasets.hpp"
#include "hyprown/eval.hpp"
#include "hyprown/geometry.hpp"

using namespace hyprown;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

template <typename F>
double best_of(int reps, F f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    double t0 = now_ms();
    f();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

}  // namespace

int main() {
  std::printf("threads: %d\n\n", eval::metric_threads());

  {
    data::TreeDataset ds =
        data::make_tree_dataset(7, 40, 0.78539816339744831, 0.3, 9);
    std::size_t t = ds.count_test();
    Matrix latents(t, 7);  // Lorentz coordinates, latent dim 6
    Rng rng(1);
    for (std::size_t i = 0; i < t; ++i) {
      Vec spatial(6);
      for (double& x : spatial) x = 0.5 * rng.normal();
      latents.set_row(i, geo::LorentzPoint::from_spatial(spatial).coords());
    }
    eval::TreeCorrelations par, ser;
    double t_par = best_of(3, [&] {
      par = eval::tree_correlations(latents, true, ds);
    });
    double t_ser = best_of(3, [&] {
      ser = eval::tree_correlations_serial(latents, true, ds);
    });
    bool equal = par.r_distance == ser.r_distance &&
                 par.r_depth == ser.r_depth && par.n_pairs == ser.n_pairs;
    std::printf("tree_correlations  %zu test rows, %zu pairs\n", t,
                par.n_pairs);
    std::printf("  parallel %8.1f ms   serial %8.1f ms   speedup %.2fx   "
                "results %s\n\n",
                t_par, t_ser, t_ser / t_par, equal ? "equal" : "DIFFER");
    if (!equal) return 1;
  }

  {
    data::HypernymyGraph g =
        data::graph_from_edges(data::binary_tree_parent_edges(9), true);
    Matrix means(g.n_words(), 10);
    Rng rng(2);
    for (std::size_t i = 0; i < means.size(); ++i) {
      means.a[i] = 0.3 * rng.normal();
    }
    eval::RankResult par, ser;
    double t_par = best_of(3, [&] {
      par = eval::rank_metrics(means, true, g);
    });
    double t_ser = best_of(3, [&] {
      ser = eval::rank_metrics_serial(means, true, g);
    });
    bool equal = par.mean_rank == ser.mean_rank && par.map == ser.map &&
                 par.n_edges == ser.n_edges;
    std::printf("rank_metrics       %zu words, %zu edges\n", g.n_words(),
                g.n_edges());
    std::printf("  parallel %8.1f ms   serial %8.1f ms   speedup %.2fx   "
                "results %s\n",
                t_par, t_ser, t_ser / t_par, equal ? "equal" : "DIFFER");
    if (!equal) return 1;
  }

  return 0;
}
