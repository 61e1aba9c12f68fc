#include "ka/geometry.hpp"

#include <cstdlib>
#include <stdexcept>

namespace ka {

Geometry::Geometry(int d, int L) : d_(d), L_(L) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("Geometry: dimension out of range");
  if (L < 1) throw std::invalid_argument("Geometry: side must be >= 1");
  size_ = 1;
  for (int i = 0; i < d; ++i) {
    if (size_ > (int64_t(1) << 40) / L) throw std::invalid_argument("Geometry: box too large");
    size_ *= L;
  }

  nbr_.resize(static_cast<size_t>(size_));
  nbr_count_.resize(static_cast<size_t>(size_), 0);
  boundary_flag_.resize(static_cast<size_t>(size_), 0);

  for (int64_t s = 0; s < size_; ++s) {
    Coord c = coord(s);
    int cnt = 0;
    auto& row = nbr_[static_cast<size_t>(s)];
    row.fill(-1);
    bool bdry = false;
    for (int i = 0; i < d_; ++i) {
      for (int step : {-1, +1}) {
        Coord n = c;
        n.x[i] += step;
        if (n.x[i] >= 1 && n.x[i] <= L_) {
          row[cnt++] = index(n);
        } else {
          bdry = true;
        }
      }
    }
    nbr_count_[static_cast<size_t>(s)] = static_cast<int8_t>(cnt);
    boundary_flag_[static_cast<size_t>(s)] = bdry ? 1 : 0;
    if (bdry) boundary_.push_back(s);
  }

  for (int64_t s = 0; s < size_; ++s) {
    const auto& row = nbr_[static_cast<size_t>(s)];
    for (int i = 0; i < nbr_count_[static_cast<size_t>(s)]; ++i) {
      if (row[i] > s) bonds_.push_back(Bond{s, row[i]});
    }
  }
}

}  // namespace ka
