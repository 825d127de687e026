#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hyprown {

using Vec = std::vector<double>;

// Error taxonomy. The CLI maps these onto process exit codes, so every
// throw site in the library picks the category deliberately.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/size disagreement between arguments.
struct DimensionError : Error {
  using Error::Error;
};

// A documented precondition or invariant was violated by the caller.
struct ContractError : Error {
  using Error::Error;
};

// Non-finite values, failed factorizations, diverged optimization.
struct NumericError : Error {
  using Error::Error;
};

// Object used outside its legal lifecycle (e.g. tape backward twice).
struct StateError : Error {
  using Error::Error;
};

// Filesystem / serialization failures.
struct IoError : Error {
  using Error::Error;
};

// Bad CLI arguments or config file contents.
struct ConfigError : Error {
  using Error::Error;
};

// Deterministic generator used for all randomness in the project. The
// algorithm is pinned so that a seed reproduces the same stream on any
// platform with IEEE-754 doubles:
//   * engine: std::mt19937_64 (fully specified by the standard),
//   * uniform doubles: (x >> 11) * 2^-53, giving [0,1) on a 2^-53 grid,
//   * normals: Box-Muller on two uniforms (the spare value is cached),
//   * bounded integers: rejection sampling against a power-of-two mask.
// std::uniform_real_distribution / std::normal_distribution are avoided
// on purpose: their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();

  // Uniform in [0,1).
  double uniform();
  // Uniform in [lo,hi).
  double uniform(double lo, double hi);
  // Standard normal.
  double normal();
  double normal(double mean, double stddev);
  // Uniform index in [0,n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Independent child stream for (seed, tag). Used to give each worker /
  // each logical phase its own stream without coupling draw order.
  Rng fork(std::uint64_t tag) const;

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::size_t j = uniform_index(i + 1);
      std::swap(items[i], items[j]);
    }
  }

  Vec normal_vec(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::string format_double(double v);

}  // namespace hyprown
