#pragma once

// Brute-force oracles for the oriented-percolation module, shared between the
// unit tests and the acceptance suite.

#include <cstdint>
#include <vector>

#include "ka/percolation.hpp"

namespace ka_test {

// Left-column-to-right-column instance on an n x n grid: sources are the left
// column, sinks the right column, region the full grid.
struct GridInstance {
  int n = 0;
  std::vector<ka::Coord> region, sources, sinks;
};

inline GridInstance grid_instance(int n) {
  GridInstance gi;
  gi.n = n;
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      ka::Coord c{a, b};
      gi.region.push_back(c);
      if (a == 1) gi.sources.push_back(c);
      if (a == n) gi.sinks.push_back(c);
    }
  }
  return gi;
}

// Exhaustive min-cut over all 2^(n^2) vertex bipartitions, matching the unit
// capacities and the super-edge capacities used by the implementation.
inline int min_cut_enumeration(const ka::GoodField& field, const GridInstance& gi) {
  const int n = gi.n;
  const int cells = n * n;
  auto ix = [n](int a, int b) { return (a - 1) * n + (b - 1); };
  // forward edges: from good (a,b) to (a+1,b) and (a,b+1)
  std::vector<std::pair<int, int>> edges;
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      if (!field.good(ka::Coord{a, b})) continue;
      if (a + 1 <= n) edges.emplace_back(ix(a, b), ix(a + 1, b));
      if (b + 1 <= n) edges.emplace_back(ix(a, b), ix(a, b + 1));
    }
  }
  int best = 1 << 30;
  for (uint32_t s = 0; s < (uint32_t(1) << cells); ++s) {
    // side S contains the super-source; T the super-sink
    int cap = 0;
    for (int a = 1; a <= n; ++a) {
      if (!((s >> ix(1, a)) & 1)) cap += 2;  // source vertex in T
      if ((s >> ix(n, a)) & 1) cap += 2;     // sink vertex in S
      if (cap >= best) break;
    }
    for (const auto& e : edges) {
      if (((s >> e.first) & 1) && !((s >> e.second) & 1)) ++cap;
      if (cap >= best) break;
    }
    if (cap < best) best = cap;
  }
  return best;
}

// Backtracking search: does a packing of `want` pairwise edge-disjoint good
// up-right source-to-sink paths exist?
struct PackingSearch {
  const ka::GoodField* field;
  const GridInstance* gi;
  std::vector<std::vector<int>> paths_as_edges;  // each path = sorted edge ids
  std::vector<uint64_t> path_masks;              // n <= 6: <= 60 edges fit a mask

  void enumerate_paths() {
    const int n = gi->n;
    // edge ids: horizontal (a,b)->(a+1,b): id = ...; vertical: offset
    auto h_id = [n](int a, int b) { return (a - 1) * n + (b - 1); };
    auto v_id = [n](int a, int b) { return n * n + (a - 1) * n + (b - 1); };
    std::vector<std::pair<int, int>> stack_path;
    std::vector<int> edge_stack;
    std::function<void(int, int)> dfs = [&](int a, int b) {
      // edges leave good vertices; the terminal sink itself may be bad
      if (a != n && !field->good(ka::Coord{a, b})) return;
      stack_path.emplace_back(a, b);
      if (a == n) {
        uint64_t mask = 0;
        for (int e : edge_stack) mask |= uint64_t(1) << e;
        path_masks.push_back(mask);
      } else {
        if (a + 1 <= n) {
          edge_stack.push_back(h_id(a, b));
          dfs(a + 1, b);
          edge_stack.pop_back();
        }
        if (b + 1 <= n) {
          edge_stack.push_back(v_id(a, b));
          dfs(a, b + 1);
          edge_stack.pop_back();
        }
      }
      stack_path.pop_back();
    };
    for (int b = 1; b <= gi->n; ++b) dfs(1, b);
  }

  bool feasible(size_t index, uint64_t used, int want) {
    if (want == 0) return true;
    if (index >= path_masks.size()) return false;
    if (path_masks.size() - index < static_cast<size_t>(want)) return false;
    // take or skip path `index`
    if ((path_masks[index] & used) == 0 &&
        feasible(index + 1, used | path_masks[index], want - 1))
      return true;
    return feasible(index + 1, used, want);
  }
};

inline bool packing_exists(const ka::GoodField& field, const GridInstance& gi, int want) {
  PackingSearch ps{&field, &gi, {}, {}};
  ps.enumerate_paths();
  return ps.feasible(0, 0, want);
}

// Verifies a max-flow witness: pairwise edge-disjoint, good, up-right, and
// running from a source to a sink.
inline bool verify_witness(const ka::GoodField& field, const GridInstance& gi,
                           const std::vector<ka::UpRightPath>& witness) {
  std::vector<std::pair<ka::Coord, ka::Coord>> used;
  for (const ka::UpRightPath& p : witness) {
    if (p.vertices.empty()) return false;
    if (!ka::path_is_up_right(p)) return false;
    bool src = false, snk = false;
    for (const ka::Coord& s : gi.sources)
      if (s == p.vertices.front()) src = true;
    for (const ka::Coord& s : gi.sinks)
      if (s == p.vertices.back()) snk = true;
    if (!src || !snk) return false;
    for (size_t t = 0; t + 1 < p.vertices.size(); ++t) {
      if (!field.good(p.vertices[t])) return false;  // edges leave good vertices
      for (const auto& e : used)
        if (e.first == p.vertices[t] && e.second == p.vertices[t + 1]) return false;
      used.emplace_back(p.vertices[t], p.vertices[t + 1]);
    }
  }
  return true;
}

}  // namespace ka_test
