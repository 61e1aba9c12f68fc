#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ka {

// mt19937_64 with hand-rolled distributions. The engine's output sequence is
// fixed by the standard; std:: distributions are not, so we avoid them to keep
// results byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Modulo bias is < n / 2^64.
  uint64_t uniform_below(uint64_t n) { return eng_() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Exponential waiting time with the given rate.
  double exponential(double rate) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u) / rate;
  }

  // Derive an independent stream, e.g. one per replica.
  static uint64_t derive(uint64_t seed, uint64_t stream) {
    // splitmix64 over (seed, stream)
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ka
