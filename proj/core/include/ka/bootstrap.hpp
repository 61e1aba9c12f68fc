#pragma once

#include <cstdint>
#include <vector>

#include "ka/config.hpp"
#include "ka/estimate.hpp"
#include "ka/geometry.hpp"
#include "ka/model.hpp"
#include "ka/rng.hpp"

namespace ka {

// k-neighbour bootstrap percolation on an arbitrary site set V (coordinates
// may lie outside Lambda). A site joins the closure once it has >= k infected
// nearest neighbours inside V.
struct BootstrapResult {
  std::vector<Coord> domain;       // V, in the order given
  std::vector<uint8_t> in_closure; // per domain entry
  std::vector<int32_t> cluster;    // component id within the closure, -1 outside
  int32_t n_clusters = 0;

  int find(const Coord& c) const;  // index into domain, -1 if absent
};

BootstrapResult bootstrap_closure(const std::vector<Coord>& infected,
                                  const std::vector<Coord>& domain, int k);

// Cluster of x in the closure, or {x} if x is not in the closure (x must be
// in V).
std::vector<Coord> cluster_of(const BootstrapResult& result, const Coord& x);

// The local box B_x = x + [-m,m]^d, clipped to Lambda by default. With
// include_phantom_outside, sites of B_x outside Lambda participate as empty.
std::vector<Coord> local_box(const Geometry& geom, const Coord& x, int m,
                             bool include_phantom_outside);

// Effective position r_x: lexicographic maximum of the cluster of x in
// [A_eta]^{B_x}, where A_eta is the set of empty sites.
Coord effective_position(const Configuration& cfg, const Geometry& geom, const Coord& x,
                         int m, int k, bool include_phantom_outside = false);

// Monte Carlo estimate of mu(cluster of the origin in [A_eta]^{B_0} touches
// the inner boundary of B_0), with B_0 = [-m,m]^d as a free-standing box.
struct BoundaryReachRecord {
  int m = 0;
  Estimate estimate;
};
BoundaryReachRecord boundary_reach_probability(const ModelParams& params, int m, int d,
                                               int k, int64_t samples, uint64_t seed);

}  // namespace ka
