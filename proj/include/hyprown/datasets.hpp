#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "hyprown/common.hpp"
#include "hyprown/linalg.hpp"

namespace hyprown::data {

// Complete binary tree in heap order: node 0 is the root, node i has
// children 2i+1 and 2i+2. Code of node i is the 0/1 indicator of
// {i and its ancestors}, so parent/child codes differ in one digit.
struct TreeCodes {
  int depth = 0;
  std::size_t n_nodes = 0;
  Matrix codes;  // [n_nodes, n_nodes]
};

TreeCodes gen_binary_tree(int depth);
int node_depth(std::size_t id);
std::size_t parent_of(std::size_t id);
int hamming(const Vec& a, const Vec& b);

struct TreeSample {
  std::size_t base_node = 0;
  int depth = 0;
  double theta = 0.0;
  bool test = false;
  Vec x;
};

struct TreeDataset {
  TreeCodes codes;
  std::vector<TreeSample> samples;
  int samples_per_node = 0;
  double theta_max = 0.0;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return codes.n_nodes; }
  std::size_t count_test() const;
};

// Noise preserving the Euclidean distance to the root code: the sample is
// root + (v-root) cos(theta) + ||v-root|| w sin(theta) with w a random
// unit direction orthogonal to (v-root). The root emits its code as-is.
std::vector<TreeSample> add_spherical_noise(const TreeCodes& codes,
                                            int samples_per_node,
                                            double theta_max, Rng& rng);

TreeDataset make_tree_dataset(int depth, int samples_per_node,
                              double theta_max, double test_fraction,
                              std::uint64_t seed);

void write_tree_csv(const TreeDataset& ds, const std::string& path);
TreeDataset read_tree_csv(const std::string& path);
void write_tree_metadata(const TreeDataset& ds, const std::string& path);

struct HypernymyGraph {
  std::vector<std::string> words;  // insertion order
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (child, parent)
  std::vector<std::unordered_set<std::size_t>> positives;  // per child

  std::size_t n_words() const { return words.size(); }
  std::size_t n_edges() const { return edges.size(); }
};

// TSV `child<TAB>parent`; '#' lines are comments. With transitive_closure,
// loaded parent edges are expanded to all (node, ancestor) pairs.
HypernymyGraph load_hypernymy(const std::string& path,
                              bool transitive_closure = false);
HypernymyGraph graph_from_edges(
    const std::vector<std::pair<std::string, std::string>>& raw_edges,
    bool transitive_closure);

// k negatives for s, uniform over non-hypernyms of s (never s itself).
// Returns fewer than k (possibly none, with a warning) only when s has
// no non-hypernym at all.
std::vector<std::size_t> negative_sample(const HypernymyGraph& g,
                                         std::size_t s, int k, Rng& rng);

// Parent edge list of the heap-ordered binary tree, nodes named n0..nK.
std::vector<std::pair<std::string, std::string>> binary_tree_parent_edges(
    int depth);
void write_edge_tsv(
    const std::vector<std::pair<std::string, std::string>>& edges,
    const std::string& path);

}  // namespace hyprown::data
