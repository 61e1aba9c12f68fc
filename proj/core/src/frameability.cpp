#include "ka/frameability.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "ka/errors.hpp"
#include "ka/rng.hpp"

namespace ka {

namespace {

// Precomputed cube shape: bonds and per-site neighbour bit masks.
struct CubeShape {
  int n, d, j;
  int sites;
  uint64_t frame_mask;
  struct CubeBond {
    int a, b;
    uint64_t nbrs_a;  // neighbours of a excluding b, as a bit mask
    uint64_t nbrs_b;
  };
  std::vector<CubeBond> bonds;
};

CubeShape build_shape(FrameSpec spec) {
  const int n = spec.n, d = spec.d;
  CubeShape shape;
  shape.n = n;
  shape.d = d;
  shape.j = spec.j;
  int64_t sites = 1;
  for (int i = 0; i < d; ++i) sites *= n;
  if (sites > 64) throw BudgetExceeded("frameability: cube exceeds 64 sites");
  shape.sites = static_cast<int>(sites);

  Geometry cube(d, n);
  // j-th frame: union of (j-1)-dimensional slices through (1,...,1); a site
  // belongs iff at most j-1 of its coordinates differ from 1.
  shape.frame_mask = 0;
  for (int64_t s = 0; s < sites; ++s) {
    Coord c = cube.coord(s);
    int nontrivial = 0;
    for (int i = 0; i < d; ++i)
      if (c.x[i] != 1) ++nontrivial;
    if (nontrivial <= spec.j - 1) shape.frame_mask |= uint64_t(1) << s;
  }
  for (const Bond& b : cube.bonds()) {
    CubeShape::CubeBond cb;
    cb.a = static_cast<int>(b.a);
    cb.b = static_cast<int>(b.b);
    cb.nbrs_a = 0;
    cb.nbrs_b = 0;
    for (int i = 0; i < cube.neighbor_count(b.a); ++i) {
      int64_t t = cube.neighbors(b.a)[i];
      if (t != b.b) cb.nbrs_a |= uint64_t(1) << t;
    }
    for (int i = 0; i < cube.neighbor_count(b.b); ++i) {
      int64_t t = cube.neighbors(b.b)[i];
      if (t != b.a) cb.nbrs_b |= uint64_t(1) << t;
    }
    shape.bonds.push_back(cb);
  }
  return shape;
}

// Reachability search over occupancy masks. Occupied = 1, so "empty count" is
// popcount of (~mask & nbrs).
bool search_frameable(uint64_t start, const CubeShape& shape, uint64_t budget) {
  if ((start & shape.frame_mask) == 0) return true;
  const int need = shape.j - 1;
  std::unordered_set<uint64_t> seen;
  seen.reserve(1024);
  std::vector<uint64_t> queue;
  seen.insert(start);
  queue.push_back(start);
  for (size_t head = 0; head < queue.size(); ++head) {
    uint64_t m = queue[head];
    for (const auto& bond : shape.bonds) {
      const uint64_t bit_a = uint64_t(1) << bond.a;
      const uint64_t bit_b = uint64_t(1) << bond.b;
      const bool occ_a = (m & bit_a) != 0;
      const bool occ_b = (m & bit_b) != 0;
      if (occ_a == occ_b) continue;  // exchange is the identity
      if (need > 0) {
        if (std::popcount(~m & bond.nbrs_a) < need) continue;
        if (std::popcount(~m & bond.nbrs_b) < need) continue;
      }
      uint64_t next = m ^ bit_a ^ bit_b;
      if (seen.insert(next).second) {
        if ((next & shape.frame_mask) == 0) return true;
        if (seen.size() > budget)
          throw BudgetExceeded("frameability: exact search infeasible (state budget)");
        queue.push_back(next);
      }
    }
  }
  return false;
}

const CubeShape& shape_for(FrameSpec spec) {
  // Shapes are tiny; keep a process-wide cache keyed by (n,d,j).
  thread_local std::unordered_map<uint64_t, CubeShape> shapes;
  uint64_t key = (uint64_t(spec.n) << 16) | (uint64_t(spec.d) << 8) | uint64_t(spec.j);
  auto it = shapes.find(key);
  if (it == shapes.end()) it = shapes.emplace(key, build_shape(spec)).first;
  return it->second;
}

}  // namespace

uint64_t pack_cube(const Configuration& cfg, const Geometry& cube_geom) {
  if (cube_geom.size() > 64) throw BudgetExceeded("pack_cube: cube exceeds 64 sites");
  uint64_t mask = 0;
  for (int64_t s = 0; s < cube_geom.size(); ++s)
    if (cfg.occupied(s)) mask |= uint64_t(1) << s;
  return mask;
}

Configuration unpack_cube(uint64_t mask, const Geometry& cube_geom) {
  Configuration cfg(cube_geom.size());
  for (int64_t s = 0; s < cube_geom.size(); ++s)
    if (mask & (uint64_t(1) << s)) cfg.set(s, true);
  return cfg;
}

bool is_frameable_mask(uint64_t mask, FrameSpec spec, uint64_t budget,
                       FrameabilityCache* cache) {
  if (spec.j < 1 || spec.j > spec.d)
    throw std::invalid_argument("is_frameable: need 1 <= j <= d");
  if (cache) {
    auto it = cache->memo.find(mask);
    if (it != cache->memo.end()) return it->second;
  }
  const CubeShape& shape = shape_for(spec);
  bool ok = search_frameable(mask, shape, budget);
  if (cache) cache->memo.emplace(mask, ok);
  return ok;
}

bool is_frameable(const Configuration& cube_cfg, FrameSpec spec, uint64_t budget,
                  FrameabilityCache* cache) {
  Geometry cube(spec.d, spec.n);
  if (cube_cfg.size() != cube.size())
    throw std::invalid_argument("is_frameable: configuration does not match cube");
  return is_frameable_mask(pack_cube(cube_cfg, cube), spec, budget, cache);
}

bool is_good_box(const Configuration& cfg, const Geometry& geom, const BoxSpec& box,
                 int k, uint64_t budget, FrameabilityCache* cache) {
  const int d = geom.dim();
  if (k < 2 || k > d) throw std::invalid_argument("is_good_box: need 2 <= k <= d");
  const int ell = box.ell;
  FrameSpec slice_spec{ell, d - 1, k - 1};
  FrameabilityCache local_cache(slice_spec);
  FrameabilityCache* use_cache = cache ? cache : &local_cache;

  int64_t slice_sites = 1;
  for (int i = 0; i < d - 1; ++i) slice_sites *= ell;
  if (slice_sites > 64) throw BudgetExceeded("is_good_box: slice exceeds 64 sites");

  Geometry slice_geom(d - 1, ell);
  // For each axis held fixed and each offset: extract the slice, then check
  // frameability of it and of every single-site flip of it.
  for (int axis = 0; axis < d; ++axis) {
    for (int offset = 0; offset < ell; ++offset) {
      uint64_t mask = 0;
      for (int64_t t = 0; t < slice_sites; ++t) {
        Coord sc = slice_geom.coord(t);
        Coord full;
        full.d = static_cast<int8_t>(d);
        int si = 0;
        for (int i = 0; i < d; ++i) {
          if (i == axis) {
            full.x[i] = box.corner.x[i] + offset;
          } else {
            full.x[i] = box.corner.x[i] + (sc.x[si++] - 1);
          }
        }
        if (!geom.contains(full))
          throw std::invalid_argument("is_good_box: box not inside Lambda");
        if (cfg.occupied(geom.index(full))) mask |= uint64_t(1) << t;
      }
      if (!is_frameable_mask(mask, slice_spec, budget, use_cache)) return false;
      for (int64_t t = 0; t < slice_sites; ++t) {
        if (!is_frameable_mask(mask ^ (uint64_t(1) << t), slice_spec, budget, use_cache))
          return false;
      }
    }
  }
  return true;
}

Estimate estimate_pi_ell(const ModelParams& params, int ell, int d, int k,
                         int64_t samples, uint64_t seed, uint64_t budget) {
  if (samples < 1) throw std::invalid_argument("estimate_pi_ell: samples >= 1");
  Geometry geom(d, ell);
  BoxSpec box;
  box.corner.d = static_cast<int8_t>(d);
  for (int i = 0; i < d; ++i) box.corner.x[i] = 1;
  box.ell = ell;
  FrameabilityCache cache(FrameSpec{ell, d - 1, k - 1});
  Rng rng(seed);
  int64_t hits = 0;
  for (int64_t s = 0; s < samples; ++s) {
    Configuration cfg = sample_configuration(geom, params, rng);
    if (is_good_box(cfg, geom, box, k, budget, &cache)) ++hits;
  }
  return proportion_estimate(hits, samples);
}

Estimate estimate_frameable_probability(double q, FrameSpec spec, int64_t samples,
                                        uint64_t seed, uint64_t budget) {
  if (samples < 1)
    throw std::invalid_argument("estimate_frameable_probability: samples >= 1");
  Geometry cube(spec.d, spec.n);
  ModelParams params{spec.j, q};
  FrameabilityCache cache(spec);
  Rng rng(seed);
  int64_t hits = 0;
  for (int64_t s = 0; s < samples; ++s) {
    Configuration cfg = sample_configuration(cube, params, rng);
    if (is_frameable(cfg, spec, budget, &cache)) ++hits;
  }
  return proportion_estimate(hits, samples);
}

namespace {

double exp_iterated(int r, double x) {
  double v = x;
  for (int i = 0; i < r; ++i) {
    if (v > 700.0) throw NumericalError("iterated exponential overflows double range");
    v = std::exp(v);
  }
  return v;
}

}  // namespace

int64_t choose_ell(double q, int k, int d, double c) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("choose_ell: need 0 < q < 1");
  if (k < 2 || k > d) throw std::invalid_argument("choose_ell: need 2 <= k <= d");
  double value;
  if (k == 2) {
    value = std::abs(std::log(q)) / std::pow(q, 1.0 / (d - 1));
  } else {
    value = exp_iterated(k - 2, c / std::pow(q, 1.0 / (d - k + 1)));
  }
  if (!(value < 9.0e15)) throw NumericalError("choose_ell: scale exceeds integer range");
  int64_t ell = static_cast<int64_t>(std::ceil(value));
  return ell < 2 ? 2 : ell;
}

double xi_scale(double q, int d, int j) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("xi_scale: need 0 < q <= 1");
  if (j < 1 || j > d) throw std::invalid_argument("xi_scale: need 1 <= j <= d");
  if (j == 1) return std::pow(1.0 / q, 1.0 / d);
  double x = std::pow(q, -1.0 / (d - j + 1));
  return exp_iterated(j - 1, x);
}

}  // namespace ka
