#include "hyprown/common.hpp"

#include <cmath>
#include <cstdio>

namespace hyprown {

namespace {

// splitmix64; used only to derive child seeds in fork().
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw ContractError("Rng::uniform: need lo < hi");
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw ContractError("Rng::uniform_index: n must be positive");
  if (n == 1) return 0;
  std::uint64_t mask = static_cast<std::uint64_t>(n) - 1;
  for (int shift : {1, 2, 4, 8, 16, 32}) mask |= mask >> shift;
  std::uint64_t v = engine_() & mask;
  while (v >= static_cast<std::uint64_t>(n)) v = engine_() & mask;
  return static_cast<std::size_t>(v);
}

Rng Rng::fork(std::uint64_t tag) const {
  return Rng(mix64(seed_ ^ mix64(tag + 0x51ab3c7fd12e0d1bULL)));
}

Vec Rng::normal_vec(std::size_t n) {
  Vec out(n);
  for (double& v : out) v = normal();
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace hyprown
