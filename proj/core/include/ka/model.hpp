#pragma once

#include "ka/config.hpp"
#include "ka/geometry.hpp"
#include "ka/rng.hpp"

namespace ka {

// How neighbours outside Lambda enter the kinetic constraint. The displayed
// exchange-rate formula together with eta = 0 outside Lambda counts them as
// empty (FormulaEmpty, the default); TextInLambda restricts the count to
// neighbours inside Lambda.
enum class OutsideRule { FormulaEmpty, TextInLambda };

struct ModelParams {
  int k = 2;       // facilitation parameter; k = 1 is SSEP
  double q = 0.5;  // vacancy density
};

// Number of empty neighbours of site s, excluding `excl` (pass -1 for none).
inline int empty_neighbors(const Configuration& cfg, const Geometry& geom, int64_t s,
                           int64_t excl, OutsideRule rule) {
  int cnt = (rule == OutsideRule::FormulaEmpty) ? geom.outside_count(s) : 0;
  const auto& nb = geom.neighbors(s);
  const int n = geom.neighbor_count(s);
  for (int i = 0; i < n; ++i) {
    int64_t t = nb[i];
    if (t != excl && cfg.empty_at(t)) ++cnt;
  }
  return cnt;
}

// c_xy(eta): both endpoints need >= k-1 empty neighbours not counting each
// other. Does not depend on eta_x, eta_y.
bool constraint_satisfied(const Configuration& cfg, const Geometry& geom, int64_t x,
                          int64_t y, const ModelParams& params,
                          OutsideRule rule = OutsideRule::FormulaEmpty);

// Constraint evaluated as if every site outside `region` were occupied
// (region given as a membership test over linear indices).
bool constraint_satisfied_in_region(const Configuration& cfg, const Geometry& geom,
                                    int64_t x, int64_t y, const ModelParams& params,
                                    const std::vector<uint8_t>& in_region);

Configuration apply_exchange(const Configuration& cfg, const Geometry& geom, int64_t x,
                             int64_t y);
Configuration apply_flip(const Configuration& cfg, const Geometry& geom, int64_t x);

// Product Bernoulli(1-q) sample over Lambda.
Configuration sample_configuration(const Geometry& geom, const ModelParams& params,
                                   Rng& rng);

// mu(eta) = p^{#occupied} q^{#empty}, p = 1-q.
double measure_weight(const Configuration& cfg, const ModelParams& params);

}  // namespace ka
