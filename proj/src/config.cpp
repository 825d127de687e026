#include "hyprown/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hyprown::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v +
                      "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(out)) {
      throw std::invalid_argument(v);
    }
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v +
                      "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + v +
                    "'");
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      seeds.push_back(static_cast<std::uint64_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("config: bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("config: empty seed list");
  return seeds;
}

void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "experiment") cfg.experiment = value;
  else if (key == "kind") cfg.kind = value;
  else if (key == "flavor") cfg.flavor = value;
  else if (key == "depth") cfg.depth = parse_int(key, value);
  else if (key == "latent_dim") cfg.latent_dim = parse_int(key, value);
  else if (key == "samples_per_node")
    cfg.samples_per_node = parse_int(key, value);
  else if (key == "theta_max") cfg.theta_max = parse_double(key, value);
  else if (key == "test_fraction")
    cfg.test_fraction = parse_double(key, value);
  else if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
  else if (key == "sigma_obs") cfg.sigma_obs = parse_double(key, value);
  else if (key == "dim") cfg.dim = parse_int(key, value);
  else if (key == "margin") cfg.margin = parse_double(key, value);
  else if (key == "negatives") cfg.negatives = parse_int(key, value);
  else if (key == "burnin_epochs")
    cfg.burnin_epochs = parse_int(key, value);
  else if (key == "lr_burnin") cfg.lr_burnin = parse_double(key, value);
  else if (key == "lr_main") cfg.lr_main = parse_double(key, value);
  else if (key == "lr_full") cfg.lr_full = parse_double(key, value);
  else if (key == "transitive_closure")
    cfg.transitive_closure = parse_bool(key, value);
  else if (key == "epochs") cfg.epochs = parse_int(key, value);
  else if (key == "kl_samples") cfg.kl_samples = parse_int(key, value);
  else if (key == "clip_norm") cfg.clip_norm = parse_double(key, value);
  else if (key == "seeds") cfg.seeds = parse_seed_list(value);
  else if (key == "data") cfg.data = value;
  else if (key == "out") cfg.out = value;
  else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": empty key");
    }
    apply_override(cfg, key, value);
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.experiment != "tree-vae" && cfg.experiment != "embed") {
    throw ConfigError("config: experiment must be tree-vae or embed, got '" +
                      cfg.experiment + "'");
  }
  if (cfg.kind != "euclidean" && cfg.kind != "hwn" && cfg.kind != "rown") {
    throw ConfigError("config: unknown kind '" + cfg.kind + "'");
  }
  if (cfg.flavor != "isotropic" && cfg.flavor != "diagonal" &&
      cfg.flavor != "full") {
    throw ConfigError("config: unknown flavor '" + cfg.flavor + "'");
  }
  if (cfg.kind == "rown" && cfg.flavor == "full") {
    throw ConfigError("config: rown has no full flavor");
  }
  if (cfg.depth < 1 || cfg.depth > 12) {
    throw ConfigError("config: depth must be in [1, 12]");
  }
  if (cfg.latent_dim < 0) throw ConfigError("config: latent_dim < 0");
  if (cfg.samples_per_node < 1) {
    throw ConfigError("config: samples_per_node must be >= 1");
  }
  if (cfg.theta_max < 0.0) throw ConfigError("config: theta_max < 0");
  if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0) {
    throw ConfigError("config: test_fraction must be in [0, 1)");
  }
  if (cfg.lr <= 0.0 || cfg.lr_burnin <= 0.0 || cfg.lr_main <= 0.0 ||
      cfg.lr_full <= 0.0) {
    throw ConfigError("config: learning rates must be positive");
  }
  if (cfg.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (cfg.sigma_obs <= 0.0) throw ConfigError("config: sigma_obs must be > 0");
  if (cfg.dim < 1) throw ConfigError("config: dim must be >= 1");
  if (cfg.negatives < 1) throw ConfigError("config: negatives must be >= 1");
  if (cfg.burnin_epochs < 0) throw ConfigError("config: burnin_epochs < 0");
  if (cfg.epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (cfg.kl_samples < 1) throw ConfigError("config: kl_samples must be >= 1");
  if (cfg.clip_norm <= 0.0) throw ConfigError("config: clip_norm must be > 0");
  if (cfg.seeds.empty()) throw ConfigError("config: seeds is empty");
}

std::string to_flat(const RunConfig& cfg) {
  std::ostringstream os;
  os << "experiment = " << cfg.experiment << "\n";
  os << "kind = " << cfg.kind << "\n";
  os << "flavor = " << cfg.flavor << "\n";
  os << "depth = " << cfg.depth << "\n";
  os << "latent_dim = " << cfg.latent_dim << "\n";
  os << "samples_per_node = " << cfg.samples_per_node << "\n";
  os << "theta_max = " << format_double(cfg.theta_max) << "\n";
  os << "test_fraction = " << format_double(cfg.test_fraction) << "\n";
  os << "lr = " << format_double(cfg.lr) << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "sigma_obs = " << format_double(cfg.sigma_obs) << "\n";
  os << "dim = " << cfg.dim << "\n";
  os << "margin = " << format_double(cfg.margin) << "\n";
  os << "negatives = " << cfg.negatives << "\n";
  os << "burnin_epochs = " << cfg.burnin_epochs << "\n";
  os << "lr_burnin = " << format_double(cfg.lr_burnin) << "\n";
  os << "lr_main = " << format_double(cfg.lr_main) << "\n";
  os << "lr_full = " << format_double(cfg.lr_full) << "\n";
  os << "transitive_closure = " << (cfg.transitive_closure ? "true" : "false")
     << "\n";
  os << "epochs = " << cfg.epochs << "\n";
  os << "kl_samples = " << cfg.kl_samples << "\n";
  os << "clip_norm = " << format_double(cfg.clip_norm) << "\n";
  os << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) os << ",";
    os << cfg.seeds[i];
  }
  os << "\n";
  os << "data = " << cfg.data << "\n";
  os << "out = " << cfg.out << "\n";
  return os.str();
}

std::string to_json(const RunConfig& cfg) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"experiment\": \"" << json_escape(cfg.experiment) << "\",\n";
  os << "  \"kind\": \"" << json_escape(cfg.kind) << "\",\n";
  os << "  \"flavor\": \"" << json_escape(cfg.flavor) << "\",\n";
  os << "  \"depth\": " << cfg.depth << ",\n";
  os << "  \"latent_dim\": " << cfg.latent_dim << ",\n";
  os << "  \"samples_per_node\": " << cfg.samples_per_node << ",\n";
  os << "  \"theta_max\": " << format_double(cfg.theta_max) << ",\n";
  os << "  \"test_fraction\": " << format_double(cfg.test_fraction) << ",\n";
  os << "  \"lr\": " << format_double(cfg.lr) << ",\n";
  os << "  \"batch_size\": " << cfg.batch_size << ",\n";
  os << "  \"sigma_obs\": " << format_double(cfg.sigma_obs) << ",\n";
  os << "  \"dim\": " << cfg.dim << ",\n";
  os << "  \"margin\": " << format_double(cfg.margin) << ",\n";
  os << "  \"negatives\": " << cfg.negatives << ",\n";
  os << "  \"burnin_epochs\": " << cfg.burnin_epochs << ",\n";
  os << "  \"lr_burnin\": " << format_double(cfg.lr_burnin) << ",\n";
  os << "  \"lr_main\": " << format_double(cfg.lr_main) << ",\n";
  os << "  \"lr_full\": " << format_double(cfg.lr_full) << ",\n";
  os << "  \"transitive_closure\": "
     << (cfg.transitive_closure ? "true" : "false") << ",\n";
  os << "  \"epochs\": " << cfg.epochs << ",\n";
  os << "  \"kl_samples\": " << cfg.kl_samples << ",\n";
  os << "  \"clip_norm\": " << format_double(cfg.clip_norm) << ",\n";
  os << "  \"seeds\": [";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) os << ", ";
    os << cfg.seeds[i];
  }
  os << "],\n";
  os << "  \"data\": \"" << json_escape(cfg.data) << "\",\n";
  os << "  \"out\": \"" << json_escape(cfg.out) << "\"\n";
  os << "}\n";
  return os.str();
}

}  // namespace hyprown::config
