#pragma once

#include <cstdint>
#include <random>

namespace hainav {

// splitmix64; used to derive independent stream seeds from a master seed.
inline uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(a ^ mix_seed(b)); }
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(mix_seed(seed)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<uint64_t>(n)); }
  uint64_t next() { return gen_(); }

  std::mt19937_64& raw() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hainav
