#pragma once

// Shared machinery between the move-script generators. Internal header.

#include <vector>

#include "ka/config.hpp"
#include "ka/geometry.hpp"
#include "ka/model.hpp"
#include "ka/moves.hpp"

namespace ka::moves_internal {

// Maps local (u, v) to lattice coordinates: origin + u*du + v*dv.
struct Frame2 {
  Coord origin;
  int du1 = 1, du2 = 0, dv1 = 0, dv2 = 1;

  Coord at(int u, int v) const {
    Coord c = origin;
    c.x[0] += u * du1 + v * dv1;
    c.x[1] += u * du2 + v * dv2;
    return c;
  }
  Frame2 transposed() const { return {origin, dv1, dv2, du1, du2}; }
};

// Applies steps to a working copy while recording them. Every emitted
// exchange is checked against the strict in-Lambda constraint so that the
// script is legal under either outside rule; a violation is a generator bug,
// not a domain refusal.
class Emitter {
 public:
  Emitter(const Configuration& cfg, const Geometry& geom, const ModelParams& params)
      : cfg_(cfg), geom_(&geom), params_(params) {}

  void swap(Coord a, Coord b);
  void flip(Coord a);
  void append_reverse(size_t from, size_t to);

  const Configuration& cfg() const { return cfg_; }
  const Geometry& geom() const { return *geom_; }
  size_t step_count() const { return steps_.size(); }
  std::vector<MoveStep> take() { return std::move(steps_); }

  void track(int64_t site) { tracked_ = site; }
  int64_t tracked() const { return tracked_; }

 private:
  Configuration cfg_;
  const Geometry* geom_;
  ModelParams params_;
  std::vector<MoveStep> steps_;
  int64_t tracked_ = -1;
};

void line_exchange(Emitter& em, const Frame2& f, int ell, int v_e, int v_p, int j);
void vacancy_walk(Emitter& em, const Frame2& f, int v, int u_from, int u_to);
int leftmost_empty_in_line(const Emitter& em, const Frame2& f, int ell, int v);
void frame_box_oriented(Emitter& em, const Frame2& f, int ell);
void conveyor_swap(Emitter& em, const Frame2& f, int c, int r);
void roll_empty_line(Emitter& em, const Frame2& f, int ell, int from, int to);

}  // namespace ka::moves_internal
