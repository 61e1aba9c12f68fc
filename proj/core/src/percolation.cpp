#include "ka/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>
#include <stdexcept>

#include "ka/rng.hpp"

namespace ka {

namespace {

// 2-d view of the plane through i spanned by (e1, e2); absolute coordinates.
struct Plane {
  const GoodField* field;
  Coord base;

  bool in(int a, int b) const {
    return a >= 1 && a <= field->N && b >= 1 && b <= field->N;
  }
  bool good(int a, int b) const {
    Coord c = base;
    c.x[0] = a;
    c.x[1] = b;
    return field->good(c);
  }
  Coord coord(int a, int b) const {
    Coord c = base;
    c.x[0] = a;
    c.x[1] = b;
    return c;
  }
};

int ell_n(int n) {
  int v = 1;
  for (int t = 0; t < n; ++t) v *= 10;
  return v;
}

// Largest n >= 1 with 10^n <= s, or 0 if none.
int n_star_for(int s) {
  int n = 0;
  while (ell_n(n + 1) <= s) ++n;
  return n;
}

}  // namespace

int isqrt_floor(int64_t n) {
  int r = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (int64_t(r + 1) * (r + 1) <= n) ++r;
  while (int64_t(r) * r > n) --r;
  return r;
}

GoodField::GoodField(int N_, int d_) : N(N_), d(d_) {
  if (d < 2 || d > kMaxDim) throw std::invalid_argument("GoodField: dimension out of range");
  if (N < 1) throw std::invalid_argument("GoodField: N >= 1 required");
  int64_t size = 1;
  for (int i = 0; i < d; ++i) {
    if (size > (int64_t(1) << 32) / N) throw std::invalid_argument("GoodField: too large");
    size *= N;
  }
  marks.assign(static_cast<size_t>(size), 0);
}

int64_t GoodField::index(const Coord& c) const {
  if (!contains(c)) throw std::invalid_argument("GoodField: coordinate out of bounds");
  int64_t idx = 0;
  for (int i = 0; i < d; ++i) idx = idx * N + (c.x[i] - 1);
  return idx;
}

bool GoodField::contains(const Coord& c) const {
  if (c.d != d) return false;
  for (int i = 0; i < d; ++i)
    if (c.x[i] < 1 || c.x[i] > N) return false;
  return true;
}

GoodField sample_good_field(double pi, int N, int d, uint64_t seed) {
  if (pi < 0.0 || pi > 1.0) throw std::invalid_argument("sample_good_field: pi in [0,1]");
  GoodField f(N, d);
  Rng rng(seed);
  for (auto& m : f.marks) m = rng.bernoulli(pi) ? 1 : 0;
  return f;
}

bool path_is_up_right(const UpRightPath& path) {
  for (size_t t = 1; t < path.vertices.size(); ++t) {
    const Coord& a = path.vertices[t - 1];
    const Coord& b = path.vertices[t];
    if (a.d != b.d) return false;
    bool step1 = (b.x[0] == a.x[0] + 1) && (b.x[1] == a.x[1]);
    bool step2 = (b.x[0] == a.x[0]) && (b.x[1] == a.x[1] + 1);
    if (!step1 && !step2) return false;
    for (int i = 2; i < a.d; ++i)
      if (a.x[i] != b.x[i]) return false;
  }
  return true;
}

bool path_is_focused(const UpRightPath& path, int64_t nominal_length) {
  if (path.vertices.empty()) return true;
  int64_t len = nominal_length > 0 ? nominal_length : path.length();
  const Coord& s = path.vertices.front();
  int64_t worst = 0;
  for (const Coord& v : path.vertices) {
    int64_t a = v.x[0] - s.x[0];
    int64_t b = v.x[1] - s.x[1];
    worst = std::max(worst, std::abs(a - b));
  }
  return worst * worst <= len;
}

bool path_is_good(const UpRightPath& path, const GoodField& field) {
  for (const Coord& v : path.vertices) {
    if (!field.contains(v) || !field.good(v)) return false;
  }
  return true;
}

bool hard_crossing_exists(const GoodField& field, const OrientedRect& rect) {
  if (rect.cross_axis != 0 && rect.cross_axis != 1)
    throw std::invalid_argument("hard_crossing_exists: cross_axis must be 0 or 1");
  Plane pl{&field, rect.corner};
  const int a0 = rect.corner.x[0], b0 = rect.corner.x[1];
  const int la = rect.len1, lb = rect.len2;
  if (la < 1 || lb < 1 || !pl.in(a0, b0) || !pl.in(a0 + la - 1, b0 + lb - 1))
    throw std::invalid_argument("hard_crossing_exists: rectangle out of bounds");

  // Oriented reachability sweep; seeds on the near short side.
  std::vector<uint8_t> reach(static_cast<size_t>(la) * lb, 0);
  auto at = [&](int ia, int ib) -> uint8_t& {
    return reach[static_cast<size_t>(ia) * lb + ib];
  };
  for (int ia = 0; ia < la; ++ia) {
    for (int ib = 0; ib < lb; ++ib) {
      if (!pl.good(a0 + ia, b0 + ib)) continue;
      bool seed = (rect.cross_axis == 0) ? (ia == 0) : (ib == 0);
      bool from_a = ia > 0 && at(ia - 1, ib);
      bool from_b = ib > 0 && at(ia, ib - 1);
      if (seed || from_a || from_b) at(ia, ib) = 1;
    }
  }
  if (rect.cross_axis == 0) {
    for (int ib = 0; ib < lb; ++ib)
      if (at(la - 1, ib)) return true;
  } else {
    for (int ia = 0; ia < la; ++ia)
      if (at(ia, lb - 1)) return true;
  }
  return false;
}

bool event_Cn(const GoodField& field, const Coord& i, int n) {
  if (n < 1) throw std::invalid_argument("event_Cn: n >= 1");
  if (!field.contains(i)) throw std::invalid_argument("event_Cn: i out of bounds");
  if (!field.good(i)) return false;
  OrientedRect h{i, ell_n(n) + 1, ell_n(n - 1) + 1, 0};
  OrientedRect v{i, ell_n(n - 1) + 1, ell_n(n) + 1, 1};
  return hard_crossing_exists(field, h) && hard_crossing_exists(field, v);
}

namespace {

// D_i as the full diagonal {i + (a,b) : a,b >= 0, a+b = sN}; members of
// H_{n*} (resp. V_{n*}) are those with b (resp. a) <= 10^(n*-1).
struct EventGeometry {
  int sN = 0;
  int n_star = 0;
  int arm = 0;  // ell_{n*-1}
};

EventGeometry event_geometry(const GoodField& field) {
  EventGeometry g;
  g.sN = isqrt_floor(field.N);
  g.n_star = n_star_for(g.sN);
  if (g.n_star < 1)
    throw std::invalid_argument("field too small for the event system (need sqrt(N) >= 10)");
  g.arm = ell_n(g.n_star - 1);
  return g;
}

}  // namespace

EventBResult event_B(const GoodField& field, const Coord& i, int window) {
  if (!field.contains(i)) throw std::invalid_argument("event_B: i out of bounds");
  EventGeometry g = event_geometry(field);
  EventBResult res;
  res.window = window > 0 ? window : 4 * g.sN;
  res.needed = 0.7 * g.sN;
  Plane pl{&field, i};
  const int i1 = i.x[0], i2 = i.x[1];
  if (!pl.in(i1 + g.sN, i2) || !pl.in(i1, i2 + g.sN))
    throw std::invalid_argument("event_B: D_i does not fit the field");

  const int wa = std::min(res.window, field.N - i1);
  const int wb = std::min(res.window, field.N - i2);
  std::vector<uint8_t> reach(static_cast<size_t>(wa + 1) * (wb + 1), 0);
  auto at = [&](int ra, int rb) -> uint8_t& {
    return reach[static_cast<size_t>(ra) * (wb + 1) + rb];
  };
  for (int ra = 0; ra <= wa; ++ra) {
    for (int rb = 0; rb <= wb; ++rb) {
      if (!pl.good(i1 + ra, i2 + rb)) continue;
      bool seed = (ra == 0 && rb <= g.sN) || (rb == 0 && ra <= g.sN);
      bool from_a = ra > 0 && at(ra - 1, rb);
      bool from_b = rb > 0 && at(ra, rb - 1);
      if (seed || from_a || from_b) at(ra, rb) = 1;
    }
  }
  int connected = 0;
  for (int ra = g.arm + 1; ra <= g.sN - g.arm - 1; ++ra) {
    int rb = g.sN - ra;
    if (ra <= wa && rb <= wb && at(ra, rb)) ++connected;
  }
  res.connected = connected;
  res.occurred = connected + 1e-9 >= res.needed;
  return res;
}

MaxFlowResult max_edge_disjoint_paths(const GoodField& field,
                                      const std::vector<Coord>& sources,
                                      const std::vector<Coord>& sinks,
                                      const std::vector<Coord>& region) {
  // Index of the region keyed by the two plane coordinates.
  const int n = static_cast<int>(region.size());
  std::unordered_map<int64_t, int> cell_ix;
  cell_ix.reserve(static_cast<size_t>(n) * 2);
  auto key = [](const Coord& c) {
    return (int64_t(c.x[0]) << 32) | uint32_t(c.x[1]);
  };
  for (int t = 0; t < n; ++t) cell_ix.emplace(key(region[static_cast<size_t>(t)]), t);
  auto find_cell = [&](const Coord& c) {
    auto it = cell_ix.find(key(c));
    return it == cell_ix.end() ? -1 : it->second;
  };
  // Adjacency-list flow network; edge pairs (e, e^1) are mutual reverses.
  struct Edge {
    int to;
    int cap;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> adj(static_cast<size_t>(n) + 2);
  const int S = n, T = n + 1;
  auto add_edge = [&](int u, int v, int cap) {
    adj[static_cast<size_t>(u)].push_back(static_cast<int>(edges.size()));
    edges.push_back(Edge{v, cap});
    adj[static_cast<size_t>(v)].push_back(static_cast<int>(edges.size()));
    edges.push_back(Edge{u, 0});
  };

  for (int t = 0; t < n; ++t) {
    const Coord& c = region[static_cast<size_t>(t)];
    if (!field.contains(c) || !field.good(c)) continue;
    for (int ax : {0, 1}) {
      Coord d = c;
      d.x[ax] += 1;
      int u = find_cell(d);
      if (u >= 0) add_edge(t, u, 1);
    }
  }
  for (const Coord& s : sources) {
    int t = find_cell(s);
    if (t >= 0) add_edge(S, t, 2);
  }
  for (const Coord& s : sinks) {
    int t = find_cell(s);
    if (t >= 0) add_edge(t, T, 2);
  }

  // Edmonds-Karp.
  MaxFlowResult result;
  std::vector<int> prev_edge(static_cast<size_t>(n) + 2);
  while (true) {
    std::fill(prev_edge.begin(), prev_edge.end(), -1);
    std::vector<int> queue{S};
    prev_edge[static_cast<size_t>(S)] = -2;
    bool found = false;
    for (size_t head = 0; head < queue.size() && !found; ++head) {
      int u = queue[head];
      for (int e : adj[static_cast<size_t>(u)]) {
        if (edges[static_cast<size_t>(e)].cap <= 0) continue;
        int v = edges[static_cast<size_t>(e)].to;
        if (prev_edge[static_cast<size_t>(v)] != -1) continue;
        prev_edge[static_cast<size_t>(v)] = e;
        if (v == T) {
          found = true;
          break;
        }
        queue.push_back(v);
      }
    }
    if (!found) break;
    for (int v = T; v != S;) {
      int e = prev_edge[static_cast<size_t>(v)];
      edges[static_cast<size_t>(e)].cap -= 1;
      edges[static_cast<size_t>(e ^ 1)].cap += 1;
      v = edges[static_cast<size_t>(e ^ 1)].to;
    }
    ++result.value;
  }

  // Decompose the integral flow into witness paths. Flow on a forward edge e
  // equals the residual capacity of its reverse e^1.
  std::vector<int> flow(edges.size() / 2, 0);
  for (size_t e = 0; e < edges.size(); e += 2) flow[e / 2] = edges[e + 1].cap;
  for (int p = 0; p < result.value; ++p) {
    UpRightPath path;
    int u = S;
    while (u != T) {
      int chosen = -1;
      for (int e : adj[static_cast<size_t>(u)]) {
        if ((e & 1) == 0 && flow[static_cast<size_t>(e) / 2] > 0) {
          chosen = e;
          break;
        }
      }
      if (chosen < 0) throw std::logic_error("flow decomposition failed");
      flow[static_cast<size_t>(chosen) / 2] -= 1;
      u = edges[static_cast<size_t>(chosen)].to;
      if (u != T) path.vertices.push_back(region[static_cast<size_t>(u)]);
    }
    result.witness.push_back(std::move(path));
  }
  return result;
}

EventAResult event_A(const GoodField& field, const Coord& i) {
  if (!field.contains(i)) throw std::invalid_argument("event_A: i out of bounds");
  EventGeometry g = event_geometry(field);
  EventAResult res;
  res.needed = 1.9 * g.sN;
  const int i1 = i.x[0], i2 = i.x[1];
  res.clipped = (int64_t(i1) + 2 * field.N > field.N) || (int64_t(i2) + 2 * field.N > field.N);
  Plane pl{&field, i};

  std::vector<Coord> region, sources, sinks;
  for (int ra = 0; i1 + ra <= field.N; ++ra) {
    for (int rb = std::max(0, ra - g.sN); rb <= ra + g.sN; ++rb) {
      if (i2 + rb > field.N) break;
      if (ra + rb < g.sN) continue;
      Coord c = pl.coord(i1 + ra, i2 + rb);
      region.push_back(c);
      if (ra + rb == g.sN) sources.push_back(c);
      if (i1 + ra == field.N || i2 + rb == field.N) sinks.push_back(c);
    }
  }
  MaxFlowResult flow = max_edge_disjoint_paths(field, sources, sinks, region);
  res.flow = flow.value;
  res.occurred = flow.value + 1e-9 >= res.needed;
  return res;
}

namespace {

// Greedy good up-right path from i to a target predicate inside the triangle
// {a,b >= 0, a+b <= sN}; prefers +e1 steps. Empty result if unreachable.
std::vector<Coord> triangle_path(const Plane& pl, const Coord& i, int sN,
                                 const std::vector<std::pair<int, int>>& targets) {
  const int i1 = i.x[0], i2 = i.x[1];
  int side = sN + 1;
  std::vector<uint8_t> reach(static_cast<size_t>(side) * side, 0);
  auto at = [&](int ra, int rb) -> uint8_t& {
    return reach[static_cast<size_t>(ra) * side + rb];
  };
  for (int ra = 0; ra < side; ++ra) {
    for (int rb = 0; rb + ra <= sN; ++rb) {
      if (!pl.in(i1 + ra, i2 + rb) || !pl.good(i1 + ra, i2 + rb)) continue;
      bool seed = (ra == 0 && rb == 0);
      bool from_a = ra > 0 && at(ra - 1, rb);
      bool from_b = rb > 0 && at(ra, rb - 1);
      if (seed || from_a || from_b) at(ra, rb) = 1;
    }
  }
  // Pick the reachable target with maximal a (lowest profile), then walk back
  // preferring the +e1 predecessor.
  int ta = -1, tb = -1;
  for (const auto& t : targets) {
    if (t.first <= sN && t.second <= sN && at(t.first, t.second)) {
      if (t.first > ta) {
        ta = t.first;
        tb = t.second;
      }
    }
  }
  if (ta < 0) return {};
  std::vector<Coord> rev;
  int ra = ta, rb = tb;
  while (true) {
    rev.push_back(pl.coord(i1 + ra, i2 + rb));
    if (ra == 0 && rb == 0) break;
    if (ra > 0 && at(ra - 1, rb)) {
      --ra;
    } else {
      --rb;
    }
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

}  // namespace

FamilyOutcome build_good_family(const GoodField& field, const Coord& i) {
  FamilyOutcome out;
  EventGeometry g = event_geometry(field);
  const int sN = g.sN;

  for (int n = 1; n <= g.n_star; ++n) {
    if (!event_Cn(field, i, n)) {
      out.failure_reason = "C_" + std::to_string(n);
      return out;
    }
  }
  EventBResult b = event_B(field, i);
  if (!b.occurred) {
    out.failure_reason = "B";
    return out;
  }
  EventAResult a = event_A(field, i);
  if (!a.occurred) {
    out.failure_reason = "A";
    return out;
  }

  Plane pl{&field, i};
  const int i1 = i.x[0], i2 = i.x[1];

  // Stems: good up-right paths from i to D_i inside H_{n*} resp. V_{n*}.
  std::vector<std::pair<int, int>> targets_h, targets_v;
  for (int rb = 0; rb <= g.arm; ++rb) targets_h.emplace_back(sN - rb, rb);
  for (int ra = 0; ra <= g.arm; ++ra) targets_v.emplace_back(ra, sN - ra);
  std::vector<Coord> stem_h = triangle_path(pl, i, sN, targets_h);
  std::vector<Coord> stem_v = triangle_path(pl, i, sN, targets_v);
  if (stem_h.empty() || stem_v.empty()) {
    out.failure_reason = "stem-unreachable";
    return out;
  }

  // B connections with parent pointers, restricted to the triangle.
  const int side = sN + 1;
  std::vector<int8_t> parent(static_cast<size_t>(side) * side, -1);  // 0:+e1 1:+e2 2:seed
  auto pat = [&](int ra, int rb) -> int8_t& {
    return parent[static_cast<size_t>(ra) * side + rb];
  };
  for (int ra = 0; ra < side; ++ra) {
    for (int rb = 0; ra + rb <= sN; ++rb) {
      if (!pl.in(i1 + ra, i2 + rb) || !pl.good(i1 + ra, i2 + rb)) continue;
      if (ra > 0 && pat(ra - 1, rb) >= 0) {
        pat(ra, rb) = 0;
      } else if (rb > 0 && pat(ra, rb - 1) >= 0) {
        pat(ra, rb) = 1;
      } else if ((ra == 0 && rb <= sN) || (rb == 0 && ra <= sN)) {
        pat(ra, rb) = 2;
      }
    }
  }

  // Max-flow witness over the diamond strip; group paths by start vertex.
  std::vector<Coord> region, sources, sinks;
  for (int ra = 0; i1 + ra <= field.N; ++ra) {
    for (int rb = std::max(0, ra - sN); rb <= ra + sN; ++rb) {
      if (i2 + rb > field.N) break;
      if (ra + rb < sN) continue;
      Coord c = pl.coord(i1 + ra, i2 + rb);
      region.push_back(c);
      if (ra + rb == sN) sources.push_back(c);
      if (i1 + ra == field.N || i2 + rb == field.N) sinks.push_back(c);
    }
  }
  MaxFlowResult flow = max_edge_disjoint_paths(field, sources, sinks, region);

  GoodFamily family;
  family.start = i;
  family.clipped = true;

  for (const UpRightPath& ap : flow.witness) {
    if (ap.vertices.empty()) continue;
    const Coord& v = ap.vertices.front();
    int ra = v.x[0] - i1, rb = v.x[1] - i2;
    if (ra + rb != sN) continue;
    if (rb <= g.arm || ra <= g.arm) continue;  // start must be in D_i \ (H u V)
    if (pat(ra, rb) < 0) continue;             // not B-connected
    // Walk the B path back to its seed.
    std::vector<Coord> bpath;
    {
      int ca = ra, cb = rb;
      while (true) {
        bpath.push_back(pl.coord(i1 + ca, i2 + cb));
        int8_t p = pat(ca, cb);
        if (p == 2) break;
        if (p == 0) {
          --ca;
        } else {
          --cb;
        }
      }
      std::reverse(bpath.begin(), bpath.end());
    }
    const Coord& u = bpath.front();
    const std::vector<Coord>& stem = (u.x[1] == i2) ? stem_h : stem_v;
    // Shared vertex: both paths are monotone, compare level by level.
    int u_level = (u.x[0] - i1) + (u.x[1] - i2);
    int cross = -1;
    for (int s = u_level; s <= sN; ++s) {
      if (s >= static_cast<int>(stem.size())) break;
      if (stem[static_cast<size_t>(s)] == bpath[static_cast<size_t>(s - u_level)]) {
        cross = s;
        break;
      }
    }
    if (cross < 0) continue;
    UpRightPath path;
    for (int s = 0; s <= cross; ++s) path.vertices.push_back(stem[static_cast<size_t>(s)]);
    for (size_t t = static_cast<size_t>(cross - u_level) + 1; t < bpath.size(); ++t)
      path.vertices.push_back(bpath[t]);
    for (size_t t = 1; t < ap.vertices.size(); ++t) path.vertices.push_back(ap.vertices[t]);
    family.paths.push_back(std::move(path));
  }

  FamilyCheck check = verify_good_family(field, i, family);
  if (!check.ok) {
    out.failure_reason = "family-verification-failed: " + check.reason;
    return out;
  }
  out.ok = true;
  out.family = std::move(family);
  return out;
}

FamilyCheck verify_good_family(const GoodField& field, const Coord& i,
                               const GoodFamily& family) {
  FamilyCheck check;
  const int sN = isqrt_floor(field.N);
  const int64_t nominal = 2 * int64_t(field.N);

  if (2 * static_cast<int64_t>(family.paths.size()) < sN) {
    check.reason = "family smaller than sqrt(N)/2";
    return check;
  }
  if (static_cast<int64_t>(family.paths.size()) > 2 * sN) {
    check.reason = "family larger than 2 sqrt(N)";
    return check;
  }
  for (const UpRightPath& p : family.paths) {
    if (p.vertices.empty() || !(p.vertices.front() == family.start) ||
        !(family.start == i)) {
      check.reason = "path does not start at i";
      return check;
    }
    if (!path_is_up_right(p)) {
      check.reason = "path not up-right";
      return check;
    }
    if (!path_is_good(p, field)) {
      check.reason = "path visits a bad or out-of-field vertex";
      return check;
    }
    if (!path_is_focused(p, nominal)) {
      check.reason = "path not focused";
      return check;
    }
    if (p.length() < nominal) {
      // Clipped families must be maximal: the path ends on the far boundary.
      const Coord& e = p.vertices.back();
      if (e.x[0] != field.N && e.x[1] != field.N) {
        check.reason = "path shorter than 2N without reaching the field boundary";
        return check;
      }
    }
  }
  // Pairwise: common edges only within l1 distance sqrt(N) of i.
  for (size_t a = 0; a < family.paths.size(); ++a) {
    for (size_t b = a + 1; b < family.paths.size(); ++b) {
      const auto& pa = family.paths[a].vertices;
      const auto& pb = family.paths[b].vertices;
      if (pa == pb) {
        check.reason = "duplicate path";
        return check;
      }
      for (size_t s = 0; s + 1 < pa.size(); ++s) {
        for (size_t t = 0; t + 1 < pb.size(); ++t) {
          if (pa[s] == pb[t] && pa[s + 1] == pb[t + 1]) {
            int dist = std::min(l1_distance(pa[s], i), l1_distance(pa[s + 1], i));
            if (int64_t(dist) * dist > field.N) {
              check.reason = "shared edge beyond sqrt(N) of the start";
              return check;
            }
          }
        }
      }
    }
  }
  check.ok = true;
  return check;
}

}  // namespace ka
