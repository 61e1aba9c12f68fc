#include <stdexcept>
#include <algorithm>
#include <set>

#include "doctest.h"
#include "ka/bootstrap.hpp"
#include "ka/model.hpp"
#include "ka/rng.hpp"

using namespace ka;

namespace {

// Independent oracle: the literal round-based growth rule.
std::set<Coord> closure_oracle(const std::vector<Coord>& infected,
                               const std::vector<Coord>& domain, int k) {
  auto in_domain = [&](const Coord& c) {
    return std::find(domain.begin(), domain.end(), c) != domain.end();
  };
  std::set<Coord> a;
  for (const Coord& c : infected)
    if (in_domain(c)) a.insert(c);
  while (true) {
    std::set<Coord> next = a;
    for (const Coord& c : domain) {
      if (a.count(c)) continue;
      int infected_nbrs = 0;
      for (int ax = 0; ax < c.d; ++ax) {
        for (int step : {-1, 1}) {
          Coord n = c;
          n.x[ax] += step;
          if (a.count(n)) ++infected_nbrs;
        }
      }
      if (infected_nbrs >= k) next.insert(c);
    }
    if (next == a) break;
    a = next;
  }
  return a;
}

std::set<Coord> closure_as_set(const BootstrapResult& res) {
  std::set<Coord> out;
  for (size_t i = 0; i < res.domain.size(); ++i)
    if (res.in_closure[i]) out.insert(res.domain[i]);
  return out;
}

std::vector<Coord> box_domain(int lo, int hi, int d) {
  std::vector<Coord> out;
  Coord c;
  c.d = static_cast<int8_t>(d);
  std::vector<int> v(static_cast<size_t>(d), lo);
  while (true) {
    for (int i = 0; i < d; ++i) c.x[i] = v[static_cast<size_t>(i)];
    out.push_back(c);
    int i = d - 1;
    while (i >= 0 && v[static_cast<size_t>(i)] == hi) {
      v[static_cast<size_t>(i)] = lo;
      --i;
    }
    if (i < 0) break;
    ++v[static_cast<size_t>(i)];
  }
  return out;
}

std::vector<Coord> empties_of(const Configuration& cfg, const Geometry& g) {
  std::vector<Coord> out;
  for (int64_t s = 0; s < g.size(); ++s)
    if (cfg.empty_at(s)) out.push_back(g.coord(s));
  return out;
}

// Independent effective-position oracle built on the round-based closure.
Coord effective_position_oracle(const Configuration& cfg, const Geometry& g,
                                const Coord& x, int m, int k) {
  std::vector<Coord> box;
  for (const Coord& c : box_domain(-m, m, g.dim())) {
    Coord p = x;
    bool ok = true;
    for (int i = 0; i < g.dim(); ++i) {
      p.x[i] += c.x[i];
      if (p.x[i] < 1 || p.x[i] > g.side()) ok = false;
    }
    if (ok) box.push_back(p);
  }
  std::vector<Coord> infected;
  for (const Coord& c : box)
    if (cfg.empty_at(g.index(c))) infected.push_back(c);
  std::set<Coord> closure = closure_oracle(infected, box, k);
  if (!closure.count(x)) return x;
  // cluster of x by flood fill
  std::set<Coord> cluster{x};
  std::vector<Coord> stack{x};
  while (!stack.empty()) {
    Coord u = stack.back();
    stack.pop_back();
    for (int ax = 0; ax < g.dim(); ++ax) {
      for (int step : {-1, 1}) {
        Coord n = u;
        n.x[ax] += step;
        if (closure.count(n) && !cluster.count(n)) {
          cluster.insert(n);
          stack.push_back(n);
        }
      }
    }
  }
  Coord best = x;
  for (const Coord& c : cluster)
    if (best < c) best = c;
  return best;
}

}  // namespace

TEST_CASE("closure: trivial cases") {
  std::vector<Coord> v = box_domain(1, 3, 2);
  BootstrapResult all = bootstrap_closure(v, v, 2);
  CHECK(closure_as_set(all).size() == v.size());

  BootstrapResult single = bootstrap_closure({Coord{2, 2}}, v, 2);
  CHECK(closure_as_set(single) == std::set<Coord>{Coord{2, 2}});
}

TEST_CASE("closure: diagonal pair fills the 2x2 square at k=2") {
  std::vector<Coord> v = box_domain(1, 2, 2);
  std::vector<Coord> a = {Coord{1, 1}, Coord{2, 2}};
  CHECK(closure_oracle(a, v, 2).size() == 4);  // oracle agrees the box fills
  BootstrapResult res = bootstrap_closure(a, v, 2);
  CHECK(closure_as_set(res).size() == 4);
  CHECK(res.n_clusters == 1);
  // cluster through any member covers the box
  CHECK(cluster_of(res, Coord{1, 2}).size() == 4);
}

TEST_CASE("closure agrees with the round-based oracle on random instances") {
  Rng rng(23);
  for (int rep = 0; rep < 300; ++rep) {
    int d = 2;
    std::vector<Coord> v = box_domain(1, 3 + static_cast<int>(rng.uniform_below(2)), d);
    std::vector<Coord> a;
    for (const Coord& c : v)
      if (rng.bernoulli(0.35)) a.push_back(c);
    int k = 1 + static_cast<int>(rng.uniform_below(3));
    BootstrapResult res = bootstrap_closure(a, v, k);
    std::set<Coord> mine = closure_as_set(res);
    CHECK(mine == closure_oracle(a, v, k));
    // idempotence
    std::vector<Coord> cl(mine.begin(), mine.end());
    BootstrapResult again = bootstrap_closure(cl, v, k);
    CHECK(closure_as_set(again) == mine);
  }
}

TEST_CASE("cluster_of: site outside the closure is a singleton") {
  std::vector<Coord> v = box_domain(1, 3, 2);
  BootstrapResult res = bootstrap_closure({Coord{1, 1}, Coord{1, 2}}, v, 2);
  CHECK(cluster_of(res, Coord{3, 3}) == std::vector<Coord>{Coord{3, 3}});
  CHECK_THROWS_AS(cluster_of(res, Coord{9, 9}), std::invalid_argument);
}

TEST_CASE("effective position: degenerate configurations") {
  Geometry g(2, 6);
  ModelParams p{2, 0.5};
  Configuration full(g.size(), true);
  CHECK(effective_position(full, g, Coord{3, 3}, 2, p.k) == Coord{3, 3});

  Configuration empty(g.size());
  // closure is the whole clipped box; lexicographic max is the top corner
  CHECK(effective_position(empty, g, Coord{3, 3}, 2, p.k) == Coord{5, 5});
  CHECK(effective_position(empty, g, Coord{5, 5}, 2, p.k) == Coord{6, 6});
}

TEST_CASE("effective position equals the exhaustive oracle") {
  Geometry g(2, 10);
  Rng rng(31);
  ModelParams p{2, 0.45};
  for (int rep = 0; rep < 300; ++rep) {
    Configuration cfg = sample_configuration(g, p, rng);
    Coord x = g.coord(static_cast<int64_t>(rng.uniform_below(g.size())));
    Coord mine = effective_position(cfg, g, x, 2, p.k);
    Coord oracle = effective_position_oracle(cfg, g, x, 2, p.k);
    CHECK(mine == oracle);
    // |r_x - x|_inf <= m always
    CHECK(std::abs(mine.x[0] - x.x[0]) <= 2);
    CHECK(std::abs(mine.x[1] - x.x[1]) <= 2);
  }
}

TEST_CASE("boundary reach probability: degenerate densities") {
  CHECK(boundary_reach_probability({2, 1.0}, 3, 2, 2, 200, 1).estimate.value ==
        doctest::Approx(1.0));
  CHECK(boundary_reach_probability({2, 0.0}, 3, 2, 2, 200, 1).estimate.value ==
        doctest::Approx(0.0));
}

TEST_CASE("boundary reach probability decreases in m") {
  // q must sit well below the bootstrap-filling regime of the box sizes used
  const double q = 0.03;
  auto r2 = boundary_reach_probability({2, q}, 2, 2, 2, 30000, 11);
  auto r4 = boundary_reach_probability({2, q}, 4, 2, 2, 30000, 12);
  auto r8 = boundary_reach_probability({2, q}, 8, 2, 2, 30000, 13);
  // three-point comparison with non-overlapping ~2-sigma intervals
  CHECK(r2.estimate.value - 2 * r2.estimate.stderr_ >
        r4.estimate.value + 2 * r4.estimate.stderr_);
  CHECK(r4.estimate.value - 2 * r4.estimate.stderr_ >
        r8.estimate.value + 2 * r8.estimate.stderr_);
}

namespace {

// Random sub-box domain of Lambda for the invariance suite.
std::vector<Coord> random_box_domain(const Geometry& g, Rng& rng) {
  int d = g.dim();
  std::vector<Coord> out;
  Coord lo, hi;
  lo.d = hi.d = static_cast<int8_t>(d);
  for (int i = 0; i < d; ++i) {
    int a = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(g.side())));
    int b = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(g.side())));
    lo.x[i] = std::min(a, b);
    hi.x[i] = std::max(a, b);
  }
  for (int64_t s = 0; s < g.size(); ++s) {
    Coord c = g.coord(s);
    bool in = true;
    for (int i = 0; i < d; ++i)
      if (c.x[i] < lo.x[i] || c.x[i] > hi.x[i]) in = false;
    if (in) out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("domain monotonicity: [A]^U subset of [A]^{U u V}") {
  Geometry g(2, 6);
  Rng rng(41);
  ModelParams p{2, 0.4};
  for (int rep = 0; rep < 400; ++rep) {
    Configuration cfg = sample_configuration(g, p, rng);
    std::vector<Coord> u = random_box_domain(g, rng);
    std::vector<Coord> v = random_box_domain(g, rng);
    std::vector<Coord> uv = u;
    for (const Coord& c : v)
      if (std::find(uv.begin(), uv.end(), c) == uv.end()) uv.push_back(c);
    std::vector<Coord> a = empties_of(cfg, g);
    auto cu = closure_as_set(bootstrap_closure(a, u, p.k));
    auto cuv = closure_as_set(bootstrap_closure(a, uv, p.k));
    for (const Coord& c : cu) CHECK(cuv.count(c) == 1);
  }
}

TEST_CASE("pivotal connection: leaving the closure after removing U touches U") {
  Geometry g(2, 6);
  Rng rng(43);
  ModelParams p{2, 0.45};
  int tested = 0;
  for (int rep = 0; rep < 600; ++rep) {
    Configuration cfg = sample_configuration(g, p, rng);
    std::vector<Coord> v = random_box_domain(g, rng);
    std::vector<Coord> u;  // U subset of V
    for (const Coord& c : v)
      if (rng.bernoulli(0.3)) u.push_back(c);
    std::vector<Coord> v_minus_u;
    for (const Coord& c : v)
      if (std::find(u.begin(), u.end(), c) == u.end()) v_minus_u.push_back(c);
    std::vector<Coord> a = empties_of(cfg, g);
    BootstrapResult full = bootstrap_closure(a, v, p.k);
    auto small = closure_as_set(bootstrap_closure(a, v_minus_u, p.k));
    for (const Coord& x : v_minus_u) {
      int ix = full.find(x);
      if (ix >= 0 && full.in_closure[static_cast<size_t>(ix)] && !small.count(x)) {
        // C_x^V must meet U
        std::vector<Coord> cluster = cluster_of(full, x);
        bool touches = false;
        for (const Coord& c : cluster)
          if (std::find(u.begin(), u.end(), c) != u.end()) touches = true;
        CHECK(touches);
        ++tested;
      }
    }
  }
  CHECK(tested > 50);  // the scenario actually occurred
}

TEST_CASE("legal exchanges preserve the closure and infect both endpoints") {
  Geometry g(2, 6);
  Rng rng(47);
  ModelParams p{2, 0.45};
  int tested = 0;
  for (int rep = 0; rep < 120; ++rep) {
    Configuration cfg = sample_configuration(g, p, rng);
    std::vector<Coord> v = random_box_domain(g, rng);
    std::vector<uint8_t> in_v(static_cast<size_t>(g.size()), 0);
    for (const Coord& c : v) in_v[static_cast<size_t>(g.index(c))] = 1;
    std::set<Coord> before_set;
    bool have_before = false;
    for (const Bond& b : g.bonds()) {
      if (!in_v[static_cast<size_t>(b.a)] || !in_v[static_cast<size_t>(b.b)]) continue;
      if (cfg.occupied(b.a) == cfg.occupied(b.b)) continue;
      if (!constraint_satisfied_in_region(cfg, g, b.a, b.b, p, in_v)) continue;
      ++tested;
      BootstrapResult before = bootstrap_closure(empties_of(cfg, g), v, p.k);
      if (!have_before) {
        before_set = closure_as_set(before);
        have_before = true;
      }
      Configuration swapped = apply_exchange(cfg, g, b.a, b.b);
      BootstrapResult after = bootstrap_closure(empties_of(swapped, g), v, p.k);
      CHECK(closure_as_set(before) == closure_as_set(after));
      int ia = before.find(g.coord(b.a));
      int ib = before.find(g.coord(b.b));
      CHECK(before.in_closure[static_cast<size_t>(ia)] == 1);
      CHECK(before.in_closure[static_cast<size_t>(ib)] == 1);
      CHECK(before.cluster[static_cast<size_t>(ia)] ==
            before.cluster[static_cast<size_t>(ib)]);
    }
  }
  CHECK(tested > 100);
}

TEST_CASE("shifted-box identity r_y(eta) = r_z(eta^yz)") {
  Geometry g(2, 12);
  Rng rng(53);
  // Small q keeps the conditioned bootstrap droplet local so the
  // cluster-avoids-the-boundary hypothesis actually occurs.
  ModelParams p{2, 0.09};
  const int m = 2;
  int tested = 0;
  for (int rep = 0; rep < 4000 && tested < 500; ++rep) {
    Configuration cfg = sample_configuration(g, p, rng);
    for (const Bond& b : g.bonds()) {
      Coord y = g.coord(b.a), z = g.coord(b.b);
      // keep both local boxes inside Lambda so the union's boundary is clean
      bool inside = true;
      for (const Coord& c : {y, z})
        for (int i = 0; i < 2; ++i)
          if (c.x[i] - m < 1 || c.x[i] + m > g.side()) inside = false;
      if (!inside) continue;
      if (cfg.occupied(b.a) == cfg.occupied(b.b)) continue;
      if (!constraint_satisfied(cfg, g, b.a, b.b, p)) continue;

      // union box B_y u B_z (for adjacent y,z the hull equals the union)
      std::vector<Coord> ub;
      for (int x1 = std::min(y.x[0], z.x[0]) - m; x1 <= std::max(y.x[0], z.x[0]) + m; ++x1)
        for (int x2 = std::min(y.x[1], z.x[1]) - m; x2 <= std::max(y.x[1], z.x[1]) + m; ++x2)
          ub.push_back(Coord{x1, x2});
      BootstrapResult res = bootstrap_closure(empties_of(cfg, g), ub, p.k);
      std::vector<Coord> cy = cluster_of(res, y);
      bool touches_boundary = false;
      for (const Coord& c : cy) {
        for (int i = 0; i < 2; ++i) {
          if (c.x[i] == std::min(y.x[i], z.x[i]) - m ||
              c.x[i] == std::max(y.x[i], z.x[i]) + m)
            touches_boundary = true;
        }
      }
      if (touches_boundary) continue;
      ++tested;
      Configuration swapped = apply_exchange(cfg, g, b.a, b.b);
      CHECK(effective_position(cfg, g, y, m, p.k) ==
            effective_position(swapped, g, z, m, p.k));
    }
  }
  CHECK(tested >= 500);
}
