#pragma once

#include <cstdint>
#include <unordered_map>

#include "ka/config.hpp"
#include "ka/estimate.hpp"
#include "ka/geometry.hpp"
#include "ka/model.hpp"

namespace ka {

// Cube [n]^d with KA-jf exchanges restricted to the cube (neighbours outside
// the cube do not count towards the constraint).
struct FrameSpec {
  int n = 2;  // cube side
  int d = 1;  // cube dimension
  int j = 1;  // facilitation parameter of the exchanges
};

inline constexpr uint64_t kDefaultStateBudget = uint64_t(1) << 25;

// Memo table for frameability of packed cube states, keyed by occupancy mask.
// One cache per (n, d, j) shape.
class FrameabilityCache {
 public:
  explicit FrameabilityCache(FrameSpec spec) : spec_(spec) {}
  FrameSpec spec() const { return spec_; }
  std::unordered_map<uint64_t, bool> memo;

 private:
  FrameSpec spec_;
};

// Occupancy mask over the cube, bit order = linear index with coordinate 1
// most significant. Requires n^d <= 64.
uint64_t pack_cube(const Configuration& cfg, const Geometry& cube_geom);
Configuration unpack_cube(uint64_t mask, const Geometry& cube_geom);

// True iff some configuration with an empty j-th frame (union of (j-1)-dim
// slices of the cube through (1,...,1)) is reachable from `mask` by legal
// KA-jf exchanges inside the cube. Throws BudgetExceeded if the reachable-set
// search would visit more than `budget` states.
bool is_frameable_mask(uint64_t mask, FrameSpec spec,
                       uint64_t budget = kDefaultStateBudget,
                       FrameabilityCache* cache = nullptr);

bool is_frameable(const Configuration& cube_cfg, FrameSpec spec,
                  uint64_t budget = kDefaultStateBudget,
                  FrameabilityCache* cache = nullptr);

// Axis-aligned box (side ell) inside a larger geometry; corner = lowest site.
struct BoxSpec {
  Coord corner;
  int ell = 1;
};

// A box is (d,k)-good iff every (d-1)-dimensional slice is (d-1,k-1)-frameable
// for the configuration and for every single-site modification of it. Only
// in-slice flips can affect a slice's frameability, so those are what is
// enumerated.
bool is_good_box(const Configuration& cfg, const Geometry& geom, const BoxSpec& box,
                 int k, uint64_t budget = kDefaultStateBudget,
                 FrameabilityCache* cache = nullptr);

// Monte Carlo estimate of pi_ell(d,k) under the product measure.
Estimate estimate_pi_ell(const ModelParams& params, int ell, int d, int k,
                         int64_t samples, uint64_t seed,
                         uint64_t budget = kDefaultStateBudget);

// Monte Carlo estimate of the (d,j)-frameable probability of [n]^d.
Estimate estimate_frameable_probability(double q, FrameSpec spec, int64_t samples,
                                        uint64_t seed,
                                        uint64_t budget = kDefaultStateBudget);

// Mesoscopic scale: |log q| / q^{1/(d-1)} for k = 2, the (k-2)-times iterated
// exponential of c / q^{1/(d-k+1)} for k >= 3; rounded up, at least 2.
int64_t choose_ell(double q, int k, int d, double c = 1.0);

// Xi_{d,1} = (1/q)^{1/d}; Xi_{d,j} = exp_{(j-1)}(q^{-1/(d-j+1)}) for j in
// [2,d]. Overflow reported as NumericalError.
double xi_scale(double q, int d, int j);

}  // namespace ka
