#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ka/geometry.hpp"

namespace ka {

// Good/bad marks over the coarse lattice [N]^d. N = 100^n keeps sqrt(N)/2
// integral; other N are accepted with the diagonal segment D_i taken as the
// full level-floor(sqrt(N)) diagonal (outward rounding).
struct GoodField {
  GoodField(int N_, int d_);
  int N;
  int d;
  std::vector<uint8_t> marks;

  int64_t index(const Coord& c) const;
  bool contains(const Coord& c) const;
  bool good(const Coord& c) const { return marks[static_cast<size_t>(index(c))] != 0; }
  void set_good(const Coord& c, bool v) {
    marks[static_cast<size_t>(index(c))] = v ? 1 : 0;
  }
};

GoodField sample_good_field(double pi, int N, int d, uint64_t seed);

// Path in the (e1,e2)-plane of the coarse lattice.
struct UpRightPath {
  std::vector<Coord> vertices;
  int64_t length() const { return static_cast<int64_t>(vertices.size()); }
};

bool path_is_up_right(const UpRightPath& path);
// d_gamma(t) <= sqrt(len), with d_gamma the l1 distance to the diagonal ray
// from the start. `nominal_length` defaults to the path's own length.
bool path_is_focused(const UpRightPath& path, int64_t nominal_length = 0);
bool path_is_good(const UpRightPath& path, const GoodField& field);

// Axis-aligned rectangle in the (e1,e2)-plane; a hard crossing is a good
// up-right path inside it connecting the two sides across `cross_axis`.
struct OrientedRect {
  Coord corner;  // lowest corner (absolute field coordinates)
  int len1 = 1;  // cells along e1
  int len2 = 1;  // cells along e2
  int cross_axis = 0;
};

bool hard_crossing_exists(const GoodField& field, const OrientedRect& rect);

// Event C_n: i is good and both H_n and V_n (anchored at i, sides 10^n x
// 10^(n-1)) have good up-right hard crossings.
bool event_Cn(const GoodField& field, const Coord& i, int n);

// Event B, evaluated as the finite connection event: vertices of
// D_i \ (H_n* u V_n*) joined to the L-shaped seed set by good up-right paths
// (such paths live in the triangle of side sqrt(N), so any window >= sqrt(N)
// is equivalent; the window is retained as an explicit search cap).
struct EventBResult {
  bool occurred = false;
  int connected = 0;
  double needed = 0.0;
  int window = 0;
  bool surrogate = true;  // finite stand-in for the infinite-path criterion
};
EventBResult event_B(const GoodField& field, const Coord& i, int window = 0);

// Event A: at least 1.9*sqrt(N) edge-disjoint good up-right paths from D_i to
// the far side of the diamond strip. Desk-scale fields clip the nominal
// length-2N strip; `clipped` reports that.
struct EventAResult {
  bool occurred = false;
  int flow = 0;
  double needed = 0.0;
  bool clipped = false;
};
EventAResult event_A(const GoodField& field, const Coord& i);

// Unit-capacity max flow on the oriented graph whose edges leave good
// vertices towards +e1/+e2 inside `region`. The witness paths are pairwise
// edge-disjoint good up-right paths, one per unit of flow.
struct MaxFlowResult {
  int value = 0;
  std::vector<UpRightPath> witness;
};
MaxFlowResult max_edge_disjoint_paths(const GoodField& field,
                                      const std::vector<Coord>& sources,
                                      const std::vector<Coord>& sinks,
                                      const std::vector<Coord>& region);

struct GoodFamily {
  Coord start;
  std::vector<UpRightPath> paths;
  bool clipped = false;
};

struct FamilyOutcome {
  bool ok = false;
  std::string failure_reason;  // which event failed, when !ok
  GoodFamily family;
};

// Constructive version of the good-family existence lemma: checks C_n for all
// n, then B, then A, and assembles the family from the hard-crossing stems,
// the B connections and the max-flow witness. The returned family has passed
// verify_good_family.
FamilyOutcome build_good_family(const GoodField& field, const Coord& i);

struct FamilyCheck {
  bool ok = false;
  std::string reason;
};

// Independent checker for the good-family invariants: common start, up-right
// steps, all vertices good, focused (relative to the nominal length 2N),
// maximal-or-length-2N under clipping, shared edges only within l1 distance
// sqrt(N) of the start, and ceil(sqrt(N)/2) <= |G| <= 2 sqrt(N).
FamilyCheck verify_good_family(const GoodField& field, const Coord& i,
                               const GoodFamily& family);

int isqrt_floor(int64_t n);

}  // namespace ka
