#pragma once

#include <string>
#include <vector>

#include "hyprown/common.hpp"

namespace hyprown::config {

// Flat experiment configuration. Every field has a usable default; the
// resolved struct is echoed as JSON into the run directory.
struct RunConfig {
  std::string experiment = "tree-vae";  // tree-vae | embed
  std::string kind = "rown";
  std::string flavor = "diagonal";

  // tree-vae
  int depth = 4;
  int latent_dim = 0;  // 0 -> depth
  int samples_per_node = 50;
  double theta_max = 0.78539816339744831;  // pi/4
  double test_fraction = 0.1;
  double lr = 1e-3;
  int batch_size = 100;
  double sigma_obs = 0.3;

  // embed
  int dim = 10;
  double margin = 1.0;
  int negatives = 10;
  int burnin_epochs = 100;
  double lr_burnin = 0.015;
  double lr_main = 0.6;
  double lr_full = 0.01;
  bool transitive_closure = false;

  // shared
  int epochs = 500;
  int kl_samples = 1;
  double clip_norm = 10.0;
  std::vector<std::uint64_t> seeds = {0};
  std::string data;
  std::string out = "run";
};

// `key = value` lines, '#' comments, blank lines ignored.
RunConfig parse_config_file(const std::string& path);

// key=value strings from the command line; later entries win.
void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value);

// Range/consistency checks shared by file and flag input.
void validate(const RunConfig& cfg);

std::string to_json(const RunConfig& cfg);

// Round-trippable `key = value` form of the resolved config.
std::string to_flat(const RunConfig& cfg);

std::vector<std::uint64_t> parse_seed_list(const std::string& s);

}  // namespace hyprown::config
