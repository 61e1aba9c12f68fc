#include "ka/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ka {

bool constraint_satisfied(const Configuration& cfg, const Geometry& geom, int64_t x,
                          int64_t y, const ModelParams& params, OutsideRule rule) {
  if (x < 0 || x >= geom.size() || y < 0 || y >= geom.size())
    throw std::invalid_argument("constraint_satisfied: site outside Lambda");
  if (!geom.adjacent(x, y))
    throw std::invalid_argument("constraint_satisfied: sites not nearest neighbours");
  const int need = params.k - 1;
  if (need <= 0) return true;
  return empty_neighbors(cfg, geom, x, y, rule) >= need &&
         empty_neighbors(cfg, geom, y, x, rule) >= need;
}

bool constraint_satisfied_in_region(const Configuration& cfg, const Geometry& geom,
                                    int64_t x, int64_t y, const ModelParams& params,
                                    const std::vector<uint8_t>& in_region) {
  if (!geom.adjacent(x, y))
    throw std::invalid_argument("constraint_satisfied_in_region: not neighbours");
  const int need = params.k - 1;
  if (need <= 0) return true;
  auto count = [&](int64_t s, int64_t excl) {
    int cnt = 0;
    const auto& nb = geom.neighbors(s);
    for (int i = 0; i < geom.neighbor_count(s); ++i) {
      int64_t t = nb[i];
      if (t != excl && in_region[static_cast<size_t>(t)] && cfg.empty_at(t)) ++cnt;
    }
    return cnt;
  };
  return count(x, y) >= need && count(y, x) >= need;
}

Configuration apply_exchange(const Configuration& cfg, const Geometry& geom, int64_t x,
                             int64_t y) {
  if (!geom.adjacent(x, y))
    throw std::invalid_argument("apply_exchange: sites not nearest neighbours");
  Configuration out = cfg;
  out.swap_sites(x, y);
  return out;
}

Configuration apply_flip(const Configuration& cfg, const Geometry& geom, int64_t x) {
  if (x < 0 || x >= geom.size())
    throw std::invalid_argument("apply_flip: site outside Lambda");
  Configuration out = cfg;
  out.flip(x);
  return out;
}

Configuration sample_configuration(const Geometry& geom, const ModelParams& params,
                                   Rng& rng) {
  Configuration cfg(geom.size());
  const double p = 1.0 - params.q;
  for (int64_t s = 0; s < geom.size(); ++s) {
    if (rng.bernoulli(p)) cfg.set(s, true);
  }
  return cfg;
}

double measure_weight(const Configuration& cfg, const ModelParams& params) {
  const double p = 1.0 - params.q;
  return std::pow(p, static_cast<double>(cfg.num_occupied())) *
         std::pow(params.q, static_cast<double>(cfg.num_empty()));
}

}  // namespace ka
