#include "hyprown/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

namespace hyprown::data {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(where + ": cannot parse number '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(where + ": cannot parse integer '" + s + "'");
  }
}

}  // namespace

int node_depth(std::size_t id) {
  int d = 0;
  while (id > 0) {
    id = (id - 1) / 2;
    ++d;
  }
  return d;
}

std::size_t parent_of(std::size_t id) {
  if (id == 0) throw ContractError("parent_of: root has no parent");
  return (id - 1) / 2;
}

TreeCodes gen_binary_tree(int depth) {
  if (depth < 1 || depth > 12) {
    throw ContractError("gen_binary_tree: depth must be in [1, 12], got " +
                        std::to_string(depth));
  }
  std::size_t n = (std::size_t{1} << depth) - 1;
  TreeCodes t;
  t.depth = depth;
  t.n_nodes = n;
  t.codes = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      std::size_t p = parent_of(i);
      for (std::size_t j = 0; j < n; ++j) t.codes(i, j) = t.codes(p, j);
    }
    t.codes(i, i) = 1.0;
  }
  return t;
}

int hamming(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionError("hamming: length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) ++d;
  }
  return d;
}

std::vector<TreeSample> add_spherical_noise(const TreeCodes& codes,
                                            int samples_per_node,
                                            double theta_max, Rng& rng) {
  if (samples_per_node < 1) {
    throw ContractError("add_spherical_noise: samples_per_node must be >= 1");
  }
  if (theta_max < 0.0) {
    throw ContractError("add_spherical_noise: theta_max must be >= 0");
  }
  const std::size_t n = codes.n_nodes;
  Vec root = codes.codes.row_vec(0);
  std::vector<TreeSample> out;
  out.reserve(n * static_cast<std::size_t>(samples_per_node));
  for (std::size_t v = 0; v < n; ++v) {
    Vec code = codes.codes.row_vec(v);
    Vec x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = code[j] - root[j];
    double xn = norm2(x);
    for (int s = 0; s < samples_per_node; ++s) {
      TreeSample smp;
      smp.base_node = v;
      smp.depth = node_depth(v);
      if (v == 0) {
        smp.theta = 0.0;
        smp.x = code;
      } else {
        double theta = theta_max > 0.0 ? rng.uniform(0.0, theta_max) : 0.0;
        Vec w = rng.normal_vec(n);
        double proj = dot(w, x) / (xn * xn);
        for (std::size_t j = 0; j < n; ++j) w[j] -= proj * x[j];
        double wn = norm2(w);
        while (wn < 1e-12) {  // essentially impossible; redraw to stay total
          w = rng.normal_vec(n);
          proj = dot(w, x) / (xn * xn);
          for (std::size_t j = 0; j < n; ++j) w[j] -= proj * x[j];
          wn = norm2(w);
        }
        smp.theta = theta;
        smp.x.resize(n);
        double ct = std::cos(theta), st = std::sin(theta);
        for (std::size_t j = 0; j < n; ++j) {
          smp.x[j] = root[j] + x[j] * ct + xn * (w[j] / wn) * st;
        }
      }
      out.push_back(std::move(smp));
    }
  }
  return out;
}

TreeDataset make_tree_dataset(int depth, int samples_per_node,
                              double theta_max, double test_fraction,
                              std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ContractError("make_tree_dataset: test_fraction must be in [0, 1)");
  }
  TreeDataset ds;
  ds.codes = gen_binary_tree(depth);
  ds.samples_per_node = samples_per_node;
  ds.theta_max = theta_max;
  ds.test_fraction = test_fraction;
  ds.seed = seed;
  Rng base(seed);
  Rng noise_rng = base.fork(1);
  Rng split_rng = base.fork(2);
  ds.samples = add_spherical_noise(ds.codes, samples_per_node, theta_max,
                                   noise_rng);
  for (TreeSample& s : ds.samples) {
    s.test = split_rng.uniform() < test_fraction;
  }
  return ds;
}

std::size_t TreeDataset::count_test() const {
  std::size_t c = 0;
  for (const TreeSample& s : samples) c += s.test ? 1 : 0;
  return c;
}

void write_tree_csv(const TreeDataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("write_tree_csv: cannot open '" + path + "'");
  const std::size_t n = ds.codes.n_nodes;
  f << "sample_id,base_node,depth,theta,split";
  for (std::size_t j = 0; j < n; ++j) f << ",x_" << j;
  f << "\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const TreeSample& s = ds.samples[i];
    f << i << "," << s.base_node << "," << s.depth << ","
      << format_double(s.theta) << "," << (s.test ? "test" : "train");
    for (std::size_t j = 0; j < n; ++j) f << "," << format_double(s.x[j]);
    f << "\n";
  }
  if (!f) throw IoError("write_tree_csv: write failed for '" + path + "'");
}

TreeDataset read_tree_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("read_tree_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) {
    throw IoError("read_tree_csv: '" + path + "' is empty");
  }
  strip_cr(line);
  std::vector<std::string> header = split(line, ',');
  if (header.size() < 6 || header[0] != "sample_id" ||
      header[1] != "base_node" || header[2] != "depth" ||
      header[3] != "theta" || header[4] != "split" || header[5] != "x_0") {
    throw IoError("read_tree_csv: '" + path + "' has an unexpected header");
  }
  std::size_t n = header.size() - 5;
  std::size_t np1 = n + 1;
  int depth = 0;
  while ((std::size_t{1} << depth) < np1) ++depth;
  if ((std::size_t{1} << depth) != np1) {
    throw IoError("read_tree_csv: column count " + std::to_string(n) +
                  " is not 2^d - 1 for any depth");
  }
  TreeDataset ds;
  ds.codes = gen_binary_tree(depth);
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> parts = split(line, ',');
    std::string where = path + ":" + std::to_string(lineno);
    if (parts.size() != n + 5) {
      throw IoError(where + ": expected " + std::to_string(n + 5) +
                    " fields, found " + std::to_string(parts.size()));
    }
    TreeSample s;
    long base = parse_long(parts[1], where);
    if (base < 0 || static_cast<std::size_t>(base) >= ds.codes.n_nodes) {
      throw IoError(where + ": base_node out of range");
    }
    s.base_node = static_cast<std::size_t>(base);
    s.depth = static_cast<int>(parse_long(parts[2], where));
    s.theta = parse_double(parts[3], where);
    if (parts[4] == "test") {
      s.test = true;
    } else if (parts[4] == "train") {
      s.test = false;
    } else {
      throw IoError(where + ": split must be 'train' or 'test'");
    }
    s.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      s.x[j] = parse_double(parts[5 + j], where);
    }
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) {
    throw IoError("read_tree_csv: '" + path + "' has no sample rows");
  }
  return ds;
}

void write_tree_metadata(const TreeDataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("write_tree_metadata: cannot open '" + path + "'");
  f << "{\n"
    << "  \"depth\": " << ds.codes.depth << ",\n"
    << "  \"n_nodes\": " << ds.codes.n_nodes << ",\n"
    << "  \"samples_per_node\": " << ds.samples_per_node << ",\n"
    << "  \"n_samples\": " << ds.samples.size() << ",\n"
    << "  \"n_test\": " << ds.count_test() << ",\n"
    << "  \"theta_max\": " << format_double(ds.theta_max) << ",\n"
    << "  \"test_fraction\": " << format_double(ds.test_fraction) << ",\n"
    << "  \"seed\": " << ds.seed << "\n"
    << "}\n";
  if (!f) throw IoError("write_tree_metadata: write failed for '" + path +
                        "'");
}

HypernymyGraph graph_from_edges(
    const std::vector<std::pair<std::string, std::string>>& raw_edges,
    bool transitive_closure) {
  HypernymyGraph g;
  auto intern = [&g](const std::string& w) {
    auto it = g.index.find(w);
    if (it != g.index.end()) return it->second;
    std::size_t id = g.words.size();
    g.words.push_back(w);
    g.index.emplace(w, id);
    return id;
  };
  std::vector<std::pair<std::size_t, std::size_t>> parent_edges;
  for (const auto& [child, parent] : raw_edges) {
    std::size_t c = intern(child);
    std::size_t p = intern(parent);
    if (c == p) continue;  // self-loops carry no relation
    parent_edges.emplace_back(c, p);
  }
  const std::size_t v = g.n_words();
  g.positives.assign(v, {});
  if (!transitive_closure) {
    for (auto [c, p] : parent_edges) {
      if (g.positives[c].insert(p).second) g.edges.emplace_back(c, p);
    }
    return g;
  }
  std::vector<std::vector<std::size_t>> up(v);
  for (auto [c, p] : parent_edges) up[c].push_back(p);
  for (std::size_t s = 0; s < v; ++s) {
    std::deque<std::size_t> frontier(up[s].begin(), up[s].end());
    std::unordered_set<std::size_t> seen;
    while (!frontier.empty()) {
      std::size_t t = frontier.front();
      frontier.pop_front();
      if (t == s || !seen.insert(t).second) continue;
      for (std::size_t nxt : up[t]) frontier.push_back(nxt);
    }
    for (std::size_t t : seen) g.positives[s].insert(t);
  }
  for (std::size_t s = 0; s < v; ++s) {
    std::vector<std::size_t> ts(g.positives[s].begin(), g.positives[s].end());
    std::sort(ts.begin(), ts.end());
    for (std::size_t t : ts) g.edges.emplace_back(s, t);
  }
  return g;
}

HypernymyGraph load_hypernymy(const std::string& path,
                              bool transitive_closure) {
  std::ifstream f(path);
  if (!f) throw IoError("load_hypernymy: cannot open '" + path + "'");
  std::vector<std::pair<std::string, std::string>> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> parts = split(line, '\t');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
      throw IoError("load_hypernymy: " + path + ":" + std::to_string(lineno) +
                    ": expected 'child<TAB>parent'");
    }
    raw.emplace_back(parts[0], parts[1]);
  }
  if (raw.empty()) {
    throw IoError("load_hypernymy: '" + path + "' contains no edges");
  }
  return graph_from_edges(raw, transitive_closure);
}

std::vector<std::size_t> negative_sample(const HypernymyGraph& g,
                                         std::size_t s, int k, Rng& rng) {
  if (s >= g.n_words()) throw ContractError("negative_sample: bad word id");
  if (k < 1) throw ContractError("negative_sample: k must be >= 1");
  const std::size_t v = g.n_words();
  const auto& pos = g.positives[s];
  std::size_t excluded = pos.size() + (pos.count(s) ? 0 : 1);
  if (excluded >= v) {
    std::fprintf(stderr,
                 "negative_sample: word %zu has no non-hypernym; returning "
                 "no negatives\n",
                 s);
    return {};
  }
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(k));
  while (out.size() < static_cast<std::size_t>(k)) {
    std::size_t t = rng.uniform_index(v);
    if (t == s || pos.count(t)) continue;
    out.push_back(t);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> binary_tree_parent_edges(
    int depth) {
  if (depth < 1 || depth > 12) {
    throw ContractError("binary_tree_parent_edges: depth must be in [1, 12]");
  }
  std::size_t n = (std::size_t{1} << depth) - 1;
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    out.emplace_back("n" + std::to_string(i),
                     "n" + std::to_string(parent_of(i)));
  }
  return out;
}

void write_edge_tsv(
    const std::vector<std::pair<std::string, std::string>>& edges,
    const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("write_edge_tsv: cannot open '" + path + "'");
  f << "# child\tparent\n";
  for (const auto& [c, p] : edges) f << c << "\t" << p << "\n";
  if (!f) throw IoError("write_edge_tsv: write failed for '" + path + "'");
}

}  // namespace hyprown::data
