#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ka {

inline constexpr int kMaxDim = 4;

// Lattice site in 1-based coordinates. Coordinate 1 is the most significant
// both for the lexicographic order and for the linear site index.
struct Coord {
  std::array<int32_t, kMaxDim> x{};
  int8_t d = 0;

  Coord() = default;
  Coord(std::initializer_list<int32_t> v) {
    d = static_cast<int8_t>(v.size());
    int i = 0;
    for (int32_t c : v) x[i++] = c;
  }

  int32_t& operator[](int i) { return x[i]; }
  int32_t operator[](int i) const { return x[i]; }

  friend bool operator==(const Coord& a, const Coord& b) {
    if (a.d != b.d) return false;
    for (int i = 0; i < a.d; ++i)
      if (a.x[i] != b.x[i]) return false;
    return true;
  }
  friend bool operator!=(const Coord& a, const Coord& b) { return !(a == b); }

  // Lexicographic, coordinate 1 most significant.
  friend bool operator<(const Coord& a, const Coord& b) {
    for (int i = 0; i < a.d; ++i) {
      if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    }
    return false;
  }
};

inline int l1_distance(const Coord& a, const Coord& b) {
  int s = 0;
  for (int i = 0; i < a.d; ++i) s += std::abs(a.x[i] - b.x[i]);
  return s;
}

struct Bond {
  int64_t a, b;  // linear site indices, a < b
};

// The box Lambda = [L]^d with nearest-neighbour structure. Sites are indexed
// linearly with coordinate 1 most significant, so the lexicographic maximum of
// a site set equals the maximal linear index.
class Geometry {
 public:
  Geometry(int d, int L);

  int dim() const { return d_; }
  int side() const { return L_; }
  int64_t size() const { return size_; }

  bool contains(const Coord& c) const {
    if (c.d != d_) return false;
    for (int i = 0; i < d_; ++i)
      if (c.x[i] < 1 || c.x[i] > L_) return false;
    return true;
  }

  int64_t index(const Coord& c) const {
    int64_t idx = 0;
    for (int i = 0; i < d_; ++i) idx = idx * L_ + (c.x[i] - 1);
    return idx;
  }

  Coord coord(int64_t idx) const {
    Coord c;
    c.d = static_cast<int8_t>(d_);
    for (int i = d_ - 1; i >= 0; --i) {
      c.x[i] = static_cast<int32_t>(idx % L_) + 1;
      idx /= L_;
    }
    return c;
  }

  // In-box neighbours of a site; entries beyond neighbor_count(s) are -1.
  const std::array<int64_t, 2 * kMaxDim>& neighbors(int64_t s) const {
    return nbr_[static_cast<size_t>(s)];
  }
  int neighbor_count(int64_t s) const { return nbr_count_[static_cast<size_t>(s)]; }
  // Number of nearest neighbours outside Lambda (norm-1 distance 1).
  int outside_count(int64_t s) const { return 2 * d_ - nbr_count_[static_cast<size_t>(s)]; }

  bool is_boundary(int64_t s) const { return boundary_flag_[static_cast<size_t>(s)] != 0; }
  const std::vector<int64_t>& boundary_sites() const { return boundary_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  bool adjacent(int64_t a, int64_t b) const {
    const auto& nb = neighbors(a);
    for (int i = 0; i < neighbor_count(a); ++i)
      if (nb[i] == b) return true;
    return false;
  }

 private:
  int d_, L_;
  int64_t size_;
  std::vector<std::array<int64_t, 2 * kMaxDim>> nbr_;
  std::vector<int8_t> nbr_count_;
  std::vector<int8_t> boundary_flag_;
  std::vector<int64_t> boundary_;
  std::vector<Bond> bonds_;
};

}  // namespace ka
