#include "ka/bootstrap.hpp"

#include <stdexcept>
#include <unordered_map>

namespace ka {

namespace {

// Pack a (possibly negative) coordinate into a hash key.
uint64_t pack_coord(const Coord& c) {
  uint64_t key = 0;
  for (int i = 0; i < c.d; ++i) {
    key = key * 0x10001ULL + static_cast<uint64_t>(c.x[i] + 0x4000);
  }
  return key;
}

}  // namespace

int BootstrapResult::find(const Coord& c) const {
  for (size_t i = 0; i < domain.size(); ++i)
    if (domain[i] == c) return static_cast<int>(i);
  return -1;
}

BootstrapResult bootstrap_closure(const std::vector<Coord>& infected,
                                  const std::vector<Coord>& domain, int k) {
  BootstrapResult res;
  res.domain = domain;
  const int n = static_cast<int>(domain.size());
  res.in_closure.assign(static_cast<size_t>(n), 0);
  res.cluster.assign(static_cast<size_t>(n), -1);
  if (n == 0) return res;

  std::unordered_map<uint64_t, int> id;
  id.reserve(static_cast<size_t>(n) * 2);
  for (int i = 0; i < n; ++i) id.emplace(pack_coord(domain[i]), i);

  const int d = domain[0].d;
  // Neighbour lists within V.
  std::vector<std::vector<int>> nbrs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int ax = 0; ax < d; ++ax) {
      for (int step : {-1, +1}) {
        Coord c = domain[static_cast<size_t>(i)];
        c.x[ax] += step;
        auto it = id.find(pack_coord(c));
        // Guard against hash collisions across distinct coords.
        if (it != id.end() && domain[static_cast<size_t>(it->second)] == c)
          nbrs[static_cast<size_t>(i)].push_back(it->second);
      }
    }
  }

  // A_0 = A intersect V, then worklist growth: a site enters once it has >= k
  // infected neighbours.
  std::vector<int> count(static_cast<size_t>(n), 0);
  std::vector<int> queue;
  queue.reserve(static_cast<size_t>(n));
  for (const Coord& a : infected) {
    auto it = id.find(pack_coord(a));
    if (it == id.end() || domain[static_cast<size_t>(it->second)] != a) continue;
    int i = it->second;
    if (!res.in_closure[static_cast<size_t>(i)]) {
      res.in_closure[static_cast<size_t>(i)] = 1;
      queue.push_back(i);
    }
  }
  for (size_t head = 0; head < queue.size(); ++head) {
    int i = queue[head];
    for (int j : nbrs[static_cast<size_t>(i)]) {
      if (res.in_closure[static_cast<size_t>(j)]) continue;
      if (++count[static_cast<size_t>(j)] >= k) {
        res.in_closure[static_cast<size_t>(j)] = 1;
        queue.push_back(j);
      }
    }
  }

  // Connected components of the closure.
  std::vector<int> stack;
  for (int i = 0; i < n; ++i) {
    if (!res.in_closure[static_cast<size_t>(i)] || res.cluster[static_cast<size_t>(i)] >= 0)
      continue;
    int label = res.n_clusters++;
    stack.push_back(i);
    res.cluster[static_cast<size_t>(i)] = label;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : nbrs[static_cast<size_t>(u)]) {
        if (res.in_closure[static_cast<size_t>(v)] &&
            res.cluster[static_cast<size_t>(v)] < 0) {
          res.cluster[static_cast<size_t>(v)] = label;
          stack.push_back(v);
        }
      }
    }
  }
  return res;
}

std::vector<Coord> cluster_of(const BootstrapResult& result, const Coord& x) {
  int ix = result.find(x);
  if (ix < 0) throw std::invalid_argument("cluster_of: x not in V");
  if (!result.in_closure[static_cast<size_t>(ix)]) return {x};
  int label = result.cluster[static_cast<size_t>(ix)];
  std::vector<Coord> out;
  for (size_t i = 0; i < result.domain.size(); ++i)
    if (result.cluster[i] == label) out.push_back(result.domain[i]);
  return out;
}

std::vector<Coord> local_box(const Geometry& geom, const Coord& x, int m,
                             bool include_phantom_outside) {
  const int d = geom.dim();
  std::vector<Coord> box;
  Coord c = x;
  std::vector<int> off(static_cast<size_t>(d), -m);
  while (true) {
    Coord p = x;
    bool inside = true;
    for (int i = 0; i < d; ++i) {
      p.x[i] += off[static_cast<size_t>(i)];
      if (p.x[i] < 1 || p.x[i] > geom.side()) inside = false;
    }
    if (inside || include_phantom_outside) box.push_back(p);
    int i = d - 1;
    while (i >= 0 && off[static_cast<size_t>(i)] == m) {
      off[static_cast<size_t>(i)] = -m;
      --i;
    }
    if (i < 0) break;
    ++off[static_cast<size_t>(i)];
  }
  (void)c;
  return box;
}

Coord effective_position(const Configuration& cfg, const Geometry& geom, const Coord& x,
                         int m, int k, bool include_phantom_outside) {
  std::vector<Coord> box = local_box(geom, x, m, include_phantom_outside);
  std::vector<Coord> infected;
  for (const Coord& c : box) {
    if (!geom.contains(c)) {
      infected.push_back(c);  // phantom sites outside Lambda are empty
    } else if (cfg.empty_at(geom.index(c))) {
      infected.push_back(c);
    }
  }
  BootstrapResult res = bootstrap_closure(infected, box, k);
  int ix = res.find(x);
  if (ix < 0 || !res.in_closure[static_cast<size_t>(ix)]) return x;
  int label = res.cluster[static_cast<size_t>(ix)];
  Coord best = x;
  bool have = false;
  for (size_t i = 0; i < res.domain.size(); ++i) {
    if (res.cluster[i] == label && (!have || best < res.domain[i])) {
      best = res.domain[i];
      have = true;
    }
  }
  return best;
}

BoundaryReachRecord boundary_reach_probability(const ModelParams& params, int m, int d,
                                               int k, int64_t samples, uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("boundary_reach_probability: samples >= 1");
  // B_0 = [-m,m]^d as its own universe; origin cluster vs inner boundary.
  std::vector<Coord> box;
  {
    Coord origin;
    origin.d = static_cast<int8_t>(d);
    std::vector<int> off(static_cast<size_t>(d), -m);
    while (true) {
      Coord p = origin;
      for (int i = 0; i < d; ++i) p.x[i] = off[static_cast<size_t>(i)];
      box.push_back(p);
      int i = d - 1;
      while (i >= 0 && off[static_cast<size_t>(i)] == m) {
        off[static_cast<size_t>(i)] = -m;
        --i;
      }
      if (i < 0) break;
      ++off[static_cast<size_t>(i)];
    }
  }
  Coord origin;
  origin.d = static_cast<int8_t>(d);
  auto on_boundary = [&](const Coord& c) {
    for (int i = 0; i < d; ++i)
      if (c.x[i] == -m || c.x[i] == m) return true;
    return false;
  };

  Rng rng(seed);
  const double p_occ = 1.0 - params.q;
  int64_t hits = 0;
  std::vector<Coord> infected;
  for (int64_t s = 0; s < samples; ++s) {
    infected.clear();
    for (const Coord& c : box) {
      if (!rng.bernoulli(p_occ)) infected.push_back(c);
    }
    BootstrapResult res = bootstrap_closure(infected, box, k);
    int io = res.find(origin);
    bool reach = false;
    if (io >= 0 && res.in_closure[static_cast<size_t>(io)]) {
      int label = res.cluster[static_cast<size_t>(io)];
      for (size_t i = 0; i < res.domain.size() && !reach; ++i)
        if (res.cluster[i] == label && on_boundary(res.domain[i])) reach = true;
    } else if (m == 0) {
      reach = true;  // degenerate box: origin is its own boundary
    }
    if (reach) ++hits;
  }
  BoundaryReachRecord rec;
  rec.m = m;
  rec.estimate = proportion_estimate(hits, samples);
  return rec;
}

}  // namespace ka
