#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ka/geometry.hpp"

namespace ka {

// Occupancy over Lambda; eta_x = 1 means occupied. Sites outside Lambda are
// fixed empty by convention and never stored.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(int64_t n_sites, bool occupied = false)
      : occ_(static_cast<size_t>(n_sites), occupied ? 1 : 0),
        n_occupied_(occupied ? n_sites : 0) {}

  int64_t size() const { return static_cast<int64_t>(occ_.size()); }
  bool occupied(int64_t s) const { return occ_[static_cast<size_t>(s)] != 0; }
  bool empty_at(int64_t s) const { return occ_[static_cast<size_t>(s)] == 0; }

  void set(int64_t s, bool v) {
    uint8_t nv = v ? 1 : 0;
    uint8_t& cell = occ_[static_cast<size_t>(s)];
    n_occupied_ += int64_t(nv) - int64_t(cell);
    cell = nv;
  }
  void flip(int64_t s) { set(s, !occupied(s)); }
  void swap_sites(int64_t a, int64_t b) {
    std::swap(occ_[static_cast<size_t>(a)], occ_[static_cast<size_t>(b)]);
  }

  int64_t num_occupied() const { return n_occupied_; }
  int64_t num_empty() const { return size() - n_occupied_; }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.occ_ == b.occ_;
  }
  friend bool operator!=(const Configuration& a, const Configuration& b) {
    return !(a == b);
  }

 private:
  std::vector<uint8_t> occ_;
  int64_t n_occupied_ = 0;
};

// Text format: "d L" header, then L^(d-1) lines of L characters ('0' empty,
// '1' occupied). Lines run over the last coordinate; line order is
// lexicographic in the leading coordinates. Round-trips bit-exactly.
std::string configuration_to_text(const Configuration& cfg, const Geometry& geom);

struct ParsedConfiguration {
  int d = 0;
  int L = 0;
  Configuration cfg;
};
ParsedConfiguration configuration_from_text(const std::string& text);

}  // namespace ka
