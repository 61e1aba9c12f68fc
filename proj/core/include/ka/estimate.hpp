#pragma once

#include <cmath>
#include <cstdint>

namespace ka {

// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  int64_t samples = 0;
};

// Estimate of a probability from a Bernoulli count.
inline Estimate proportion_estimate(int64_t hits, int64_t samples) {
  Estimate e;
  e.samples = samples;
  if (samples > 0) {
    double p = static_cast<double>(hits) / static_cast<double>(samples);
    e.value = p;
    e.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  }
  return e;
}

// Running mean/variance accumulator (Welford).
class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_of_mean() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }
  Estimate estimate() const { return Estimate{mean(), stderr_of_mean(), n_}; }

 private:
  int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace ka
