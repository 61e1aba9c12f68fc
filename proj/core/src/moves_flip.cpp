#include <algorithm>
#include <string>

#include "ka/moves.hpp"
#include "ka/moves_internal.hpp"

// The composite flip move for k = d = 2. One empty boundary line travels
// backward along the coarse path and is reshaped, via oriented framings of
// the Q_i boxes, into the L-shaped workspace around B_i (the outer top row,
// the outer right column and their shared corner). A second boundary line
// parks as the outer right column. The conveyor machinery then carries the
// value at x out of the otherwise unconstrained box B_i, a caravan of site
// jumps and column exchanges transports it to the boundary, a single
// boundary flip toggles it, and the exact reversal of every earlier step
// carries the toggled value back while restoring every other site.

namespace ka {

using namespace moves_internal;

namespace {

struct CoarseGeometry {
  int N = 0;
  int ell = 0;
  int col0(int j1) const { return (j1 - 1) * ell + 1; }
  int row0(int j2) const { return (j2 - 1) * ell + 1; }
};

// Orientation and position of a travelling empty line.
struct ECLine {
  bool vertical = true;
  int pos = 0;  // column (vertical) or row (horizontal)
  int lo = 0;   // first coordinate of the spanned segment
};

class FlipBuilder {
 public:
  FlipBuilder(const Configuration& cfg, const Geometry& geom, const ModelParams& params,
              Coord x, const UpRightPath& path, int ell)
      : em_(cfg, geom, params),
        geom_(&geom),
        params_(params),
        x_(x),
        path_(path),
        ell_(ell) {
    cg_.ell = ell;
    cg_.N = ell > 0 ? geom.side() / ell : 0;
  }

  MoveScript build();

 private:
  Emitter em_;
  const Geometry* geom_;
  ModelParams params_;
  Coord x_;
  UpRightPath path_;
  int ell_;
  CoarseGeometry cg_;
  Coord i_;
  int axi_ = 0, ayi_ = 0;  // base of B_i

  bool empty_at(int c, int r) const {
    return em_.cfg().empty_at(geom_->index(Coord{c, r}));
  }
  Coord star() const { return geom_->coord(em_.tracked()); }

  void validate();
  void require_good(const Coord& coarse, const char* what) const;

  ECLine create_boundary_line(const Coord& end_box);
  void line_step_left(ECLine& ec);
  void line_step_down(ECLine& ec);
  void journey_to_p1();

  void frame_bottom_to_left(const Coord& box);
  void frame_left_to_bottom(const Coord& box);
  void frame_left_to_top(const Coord& box);
  void frame_right_to_bottom(const Coord& box);

  void assemble_workspace();
  void ensure_corner_empty();

  void transport_star_out_of_box();
  int find_column_empty(int col, int row_lo, int exclude_row) const;
  int find_row_empty(int row, int col_lo, int exclude_col) const;
  void jump_horizontal(int star_col, int mid_col, int row_lo);
  void jump_vertical(int star_row, int mid_row, int col_lo);
  void slide_star_in_column(int col, int to_row);
  void slide_star_in_row(int row, int to_col);
  void walk_vacancy_in_column(int col, int from, int to);
  void walk_vacancy_in_row(int row, int from, int to);
  void caravan_step_right(int ec_col, int row_lo);
  void horizontal_endgame(int row_lo);
  void turn_up(const Coord& box);
  void transport_in_framed_box(const Coord& box, Coord target);
  void caravan_to_boundary();
};

void FlipBuilder::require_good(const Coord& coarse, const char* what) const {
  Geometry box_geom(2, ell_);
  Configuration sub(box_geom.size());
  int c0 = cg_.col0(coarse.x[0]), r0 = cg_.row0(coarse.x[1]);
  for (int u = 0; u < ell_; ++u)
    for (int v = 0; v < ell_; ++v)
      sub.set(box_geom.index(Coord{u + 1, v + 1}),
              em_.cfg().occupied(geom_->index(Coord{c0 + u, r0 + v})));
  BoxSpec box{Coord{1, 1}, ell_};
  if (!is_good_box(sub, box_geom, box, 2)) {
    throw DomainViolation(std::string("flip_at_x: ") + what + " box (" +
                          std::to_string(coarse.x[0]) + "," +
                          std::to_string(coarse.x[1]) + ") is not good");
  }
}

void FlipBuilder::validate() {
  if (geom_->dim() != 2 || params_.k != 2)
    throw std::invalid_argument("flip_at_x: requires d = k = 2");
  if (ell_ < 3) throw std::invalid_argument("flip_at_x: requires ell >= 3");
  if (geom_->side() % ell_ != 0)
    throw std::invalid_argument("flip_at_x: L must be a multiple of ell");
  if (!geom_->contains(x_)) throw std::invalid_argument("flip_at_x: x outside Lambda");

  i_ = Coord{(x_.x[0] - 1) / ell_ + 1, (x_.x[1] - 1) / ell_ + 1};
  axi_ = cg_.col0(i_.x[0]);
  ayi_ = cg_.row0(i_.x[1]);
  if (i_.x[0] + 1 > cg_.N || i_.x[1] + 1 > cg_.N)
    throw DomainViolation("flip_at_x: the box of x touches the far coarse boundary");

  if (path_.vertices.empty() || !(path_.vertices.front() == Coord{i_.x[0] + 1, i_.x[1]}))
    throw std::invalid_argument("flip_at_x: path must start at i + e1");
  if (!path_is_up_right(path_))
    throw std::invalid_argument("flip_at_x: path must be up-right");
  const Coord& end = path_.vertices.back();
  if (end.x[0] != cg_.N && end.x[1] != cg_.N)
    throw std::invalid_argument("flip_at_x: path must end on the far coarse boundary");
  for (const Coord& j : path_.vertices) {
    if (j.x[0] < 1 || j.x[0] > cg_.N || j.x[1] < 1 || j.x[1] > cg_.N)
      throw std::invalid_argument("flip_at_x: path leaves the coarse box");
  }

  for (const Coord& j : path_.vertices) require_good(j, "path");
  for (const Coord& j : {Coord{i_.x[0] + 1, i_.x[1]}, Coord{i_.x[0], i_.x[1] + 1},
                         Coord{i_.x[0] + 1, i_.x[1] + 1}}) {
    require_good(j, "Q_i");
  }
}

// ---------------------------------------------------------------------------
// Oriented framings
// ---------------------------------------------------------------------------

void FlipBuilder::frame_bottom_to_left(const Coord& box) {
  Frame2 f{Coord{cg_.col0(box.x[0]), cg_.row0(box.x[1])}, 1, 0, 0, 1};
  frame_box_oriented(em_, f, ell_);
}

void FlipBuilder::frame_left_to_bottom(const Coord& box) {
  Frame2 f{Coord{cg_.col0(box.x[0]), cg_.row0(box.x[1])}, 0, 1, 1, 0};
  frame_box_oriented(em_, f, ell_);
}

void FlipBuilder::frame_left_to_top(const Coord& box) {
  Frame2 f{Coord{cg_.col0(box.x[0]), cg_.row0(box.x[1]) + ell_ - 1}, 0, -1, 1, 0};
  frame_box_oriented(em_, f, ell_);
}

void FlipBuilder::frame_right_to_bottom(const Coord& box) {
  Frame2 f{Coord{cg_.col0(box.x[0]) + ell_ - 1, cg_.row0(box.x[1])}, 0, 1, -1, 0};
  frame_box_oriented(em_, f, ell_);
}

// ---------------------------------------------------------------------------
// Travelling empty line
// ---------------------------------------------------------------------------

ECLine FlipBuilder::create_boundary_line(const Coord& end_box) {
  ECLine ec;
  if (end_box.x[0] == cg_.N) {
    ec.vertical = true;
    ec.pos = geom_->side();
    ec.lo = cg_.row0(end_box.x[1]);
    for (int r = ec.lo; r < ec.lo + ell_; ++r)
      if (!empty_at(ec.pos, r)) em_.flip(Coord{ec.pos, r});
  } else {
    ec.vertical = false;
    ec.pos = geom_->side();
    ec.lo = cg_.col0(end_box.x[0]);
    for (int c = ec.lo; c < ec.lo + ell_; ++c)
      if (!empty_at(c, ec.pos)) em_.flip(Coord{c, ec.pos});
  }
  return ec;
}

void FlipBuilder::line_step_left(ECLine& ec) {
  int j = find_column_empty(ec.pos - 1, ec.lo, -1);
  if (j < 0)
    throw DomainViolation("flip_at_x: column " + std::to_string(ec.pos - 1) +
                          " has no empty site for the line passage");
  Frame2 f{Coord{ec.pos, ec.lo}, 0, 1, -1, 0};
  line_exchange(em_, f, ell_, 0, 1, j - ec.lo);
  --ec.pos;
}

void FlipBuilder::line_step_down(ECLine& ec) {
  int j = find_row_empty(ec.pos - 1, ec.lo, -1);
  if (j < 0)
    throw DomainViolation("flip_at_x: row " + std::to_string(ec.pos - 1) +
                          " has no empty site for the line passage");
  Frame2 f{Coord{ec.lo, ec.pos}, 1, 0, 0, -1};
  line_exchange(em_, f, ell_, 0, 1, j - ec.lo);
  --ec.pos;
}

void FlipBuilder::journey_to_p1() {
  ECLine ec = create_boundary_line(path_.vertices.back());
  for (size_t t = path_.vertices.size(); t-- > 1;) {
    const Coord& cur = path_.vertices[t];
    const Coord& nxt = path_.vertices[t - 1];
    if (nxt.x[0] + 1 == cur.x[0]) {
      // exit left
      if (!ec.vertical) {
        while (ec.pos > cg_.row0(cur.x[1])) line_step_down(ec);
        frame_bottom_to_left(cur);
        ec = ECLine{true, cg_.col0(cur.x[0]), cg_.row0(cur.x[1])};
      }
      while (ec.pos > cg_.col0(nxt.x[0])) line_step_left(ec);
    } else {
      // exit down
      if (ec.vertical) {
        while (ec.pos > cg_.col0(cur.x[0])) line_step_left(ec);
        frame_left_to_bottom(cur);
        ec = ECLine{false, cg_.row0(cur.x[1]), cg_.col0(cur.x[0])};
      }
      while (ec.pos > cg_.row0(nxt.x[1])) line_step_down(ec);
    }
  }
  // park as P1's left column
  const Coord& p1 = path_.vertices.front();
  if (!ec.vertical) {
    while (ec.pos > cg_.row0(p1.x[1])) line_step_down(ec);
    frame_bottom_to_left(p1);
  } else {
    while (ec.pos > cg_.col0(p1.x[0])) line_step_left(ec);
  }
}

// ---------------------------------------------------------------------------
// Workspace assembly
// ---------------------------------------------------------------------------

void FlipBuilder::ensure_corner_empty() {
  const Coord corner{axi_ + ell_, ayi_ + ell_};
  if (empty_at(corner.x[0], corner.x[1])) return;
  for (Coord cand : {Coord{corner.x[0] + 1, corner.x[1]},
                     Coord{corner.x[0], corner.x[1] + 1}}) {
    if (!empty_at(cand.x[0], cand.x[1])) continue;
    if (!constraint_satisfied(em_.cfg(), *geom_, geom_->index(corner),
                              geom_->index(cand), params_, OutsideRule::TextInLambda))
      continue;
    em_.swap(corner, cand);
    return;
  }
  throw DomainViolation("flip_at_x: cannot clear the workspace corner");
}

void FlipBuilder::assemble_workspace() {
  Coord p2{i_.x[0], i_.x[1] + 1};
  Coord p3{i_.x[0] + 1, i_.x[1] + 1};

  // P1's left column is empty; raise an empty top row and push it into P3.
  frame_left_to_top(path_.vertices.front());
  {
    int j = find_row_empty(ayi_ + ell_, axi_ + ell_, -1);
    if (j < 0) throw DomainViolation("flip_at_x: P3 bottom row has no empty site");
    Frame2 f{Coord{axi_ + ell_, ayi_ + ell_ - 1}, 1, 0, 0, 1};
    line_exchange(em_, f, ell_, 0, 1, j - (axi_ + ell_));
  }
  frame_bottom_to_left(p3);
  // Push P3's left column onto P2's right column.
  {
    int j = find_column_empty(axi_ + ell_ - 1, ayi_ + ell_, -1);
    if (j < 0) throw DomainViolation("flip_at_x: P2 right column has no empty site");
    Frame2 f{Coord{axi_ + ell_, ayi_ + ell_}, 0, 1, -1, 0};
    line_exchange(em_, f, ell_, 0, 1, j - (ayi_ + ell_));
  }
  frame_right_to_bottom(p2);
  ensure_corner_empty();
}

// ---------------------------------------------------------------------------
// Star transport
// ---------------------------------------------------------------------------

int FlipBuilder::find_column_empty(int col, int row_lo, int exclude_row) const {
  Coord s = star();
  for (int r = row_lo; r < row_lo + ell_; ++r) {
    if (r == exclude_row) continue;
    if (s.x[0] == col && s.x[1] == r) continue;  // the star's cell never counts
    if (empty_at(col, r)) return r;
  }
  return -1;
}

int FlipBuilder::find_row_empty(int row, int col_lo, int exclude_col) const {
  Coord s = star();
  for (int c = col_lo; c < col_lo + ell_; ++c) {
    if (c == exclude_col) continue;
    if (s.x[0] == c && s.x[1] == row) continue;
    if (empty_at(c, row)) return c;
  }
  return -1;
}

void FlipBuilder::slide_star_in_column(int col, int to_row) {
  int r = star().x[1];
  while (r < to_row) {
    em_.swap(Coord{col, r}, Coord{col, r + 1});
    ++r;
  }
  while (r > to_row) {
    em_.swap(Coord{col, r}, Coord{col, r - 1});
    --r;
  }
}

void FlipBuilder::slide_star_in_row(int row, int to_col) {
  int c = star().x[0];
  while (c < to_col) {
    em_.swap(Coord{c, row}, Coord{c + 1, row});
    ++c;
  }
  while (c > to_col) {
    em_.swap(Coord{c, row}, Coord{c - 1, row});
    --c;
  }
}

void FlipBuilder::walk_vacancy_in_column(int col, int from, int to) {
  int cur = from;
  while (cur > to) {
    em_.swap(Coord{col, cur - 1}, Coord{col, cur});
    --cur;
  }
  while (cur < to) {
    em_.swap(Coord{col, cur + 1}, Coord{col, cur});
    ++cur;
  }
}

void FlipBuilder::walk_vacancy_in_row(int row, int from, int to) {
  int cur = from;
  while (cur > to) {
    em_.swap(Coord{cur - 1, row}, Coord{cur, row});
    --cur;
  }
  while (cur < to) {
    em_.swap(Coord{cur + 1, row}, Coord{cur, row});
    ++cur;
  }
}

void FlipBuilder::jump_horizontal(int star_col, int mid_col, int row_lo) {
  const int right_col = mid_col + 1;
  int sr = star().x[1];
  int jump_row = -1;
  for (int off = 0; off < ell_; ++off) {
    int r = row_lo + ((sr - row_lo) + off) % ell_;
    if (find_column_empty(star_col, row_lo, r) < 0) continue;
    if (find_column_empty(right_col, row_lo, r) < 0) continue;
    jump_row = r;
    break;
  }
  if (jump_row < 0)
    throw DomainViolation("flip_at_x: no feasible jump row at column " +
                          std::to_string(mid_col));
  slide_star_in_column(star_col, jump_row);

  int sl = find_column_empty(star_col, row_lo, jump_row);
  int srr = find_column_empty(right_col, row_lo, jump_row);
  int left_park = sl > jump_row ? jump_row + 1 : jump_row - 1;
  int right_park = srr > jump_row ? jump_row + 1 : jump_row - 1;
  walk_vacancy_in_column(star_col, sl, left_park);
  walk_vacancy_in_column(right_col, srr, right_park);
  em_.swap(Coord{star_col, jump_row}, Coord{mid_col, jump_row});
  em_.swap(Coord{mid_col, jump_row}, Coord{right_col, jump_row});
  em_.swap(Coord{star_col, jump_row}, Coord{mid_col, jump_row});
  walk_vacancy_in_column(star_col, left_park, sl);
  walk_vacancy_in_column(right_col, right_park, srr);
}

void FlipBuilder::jump_vertical(int star_row, int mid_row, int col_lo) {
  const int top_row = mid_row + 1;
  int sc = star().x[0];
  int jump_col = -1;
  for (int off = 0; off < ell_; ++off) {
    int c = col_lo + ((sc - col_lo) + off) % ell_;
    if (find_row_empty(star_row, col_lo, c) < 0) continue;
    if (find_row_empty(top_row, col_lo, c) < 0) continue;
    jump_col = c;
    break;
  }
  if (jump_col < 0)
    throw DomainViolation("flip_at_x: no feasible jump column at row " +
                          std::to_string(mid_row));
  slide_star_in_row(star_row, jump_col);

  int sl = find_row_empty(star_row, col_lo, jump_col);
  int st = find_row_empty(top_row, col_lo, jump_col);
  int low_park = sl > jump_col ? jump_col + 1 : jump_col - 1;
  int top_park = st > jump_col ? jump_col + 1 : jump_col - 1;
  walk_vacancy_in_row(star_row, sl, low_park);
  walk_vacancy_in_row(top_row, st, top_park);
  em_.swap(Coord{jump_col, star_row}, Coord{jump_col, mid_row});
  em_.swap(Coord{jump_col, mid_row}, Coord{jump_col, top_row});
  em_.swap(Coord{jump_col, star_row}, Coord{jump_col, mid_row});
  walk_vacancy_in_row(star_row, low_park, sl);
  walk_vacancy_in_row(top_row, top_park, st);
}

void FlipBuilder::transport_star_out_of_box() {
  // Virtual (ell+1)-sided framed box: its frame lines are the conveyor home
  // (outer top row of B_i plus the corner) and the reservoir column.
  Frame2 fv{Coord{axi_ + ell_, ayi_ + ell_}, -1, 0, 0, -1};
  const int side = ell_ + 1;
  int u_x = axi_ + ell_ - star().x[0];
  int v_x = ayi_ + ell_ - star().x[1];

  if (v_x == 1) {
    // x sits in B_i's top row: the home conveyor is directly above, so move
    // it along that row first, then one row down via the reservoir.
    for (int u = u_x; u >= 2; --u) conveyor_swap(em_, fv, u - 1, 1);
    conveyor_swap(em_, fv.transposed(), 1, 1);
    v_x = 2;
    u_x = 1;
  }
  roll_empty_line(em_, fv, side, 0, v_x - 1);
  for (int u = u_x; u >= 2; --u) conveyor_swap(em_, fv, u - 1, v_x);
  // the star now sits in B_i's rightmost column with the parked conveyor
  // adjacent above; the parked lines are restored by the global reversal
}

void FlipBuilder::transport_in_framed_box(const Coord& box, Coord target) {
  const int c0 = cg_.col0(box.x[0]), r0 = cg_.row0(box.x[1]);
  Frame2 f{Coord{c0, r0}, 1, 0, 0, 1};
  Coord s = star();
  int su = s.x[0] - c0, sv = s.x[1] - r0;
  int tu = target.x[0] - c0, tv = target.x[1] - r0;
  if (sv != tv) {
    roll_empty_line(em_, f.transposed(), ell_, 0, su - 1);
    while (sv > tv) {
      conveyor_swap(em_, f.transposed(), sv - 1, su);
      --sv;
    }
    while (sv < tv) {
      conveyor_swap(em_, f.transposed(), sv, su);
      ++sv;
    }
    roll_empty_line(em_, f.transposed(), ell_, su - 1, 0);
  }
  if (su != tu) {
    roll_empty_line(em_, f, ell_, 0, sv - 1);
    while (su > tu) {
      conveyor_swap(em_, f, su - 1, sv);
      --su;
    }
    while (su < tu) {
      conveyor_swap(em_, f, su, sv);
      ++su;
    }
    roll_empty_line(em_, f, ell_, sv - 1, 0);
  }
}

void FlipBuilder::caravan_step_right(int ec_col, int row_lo) {
  jump_horizontal(ec_col - 1, ec_col, row_lo);
  // never let the star's own cell serve as the designated vacancy: the
  // reversal replays these steps with the payload bit flipped
  int j = find_column_empty(ec_col + 1, row_lo, star().x[1]);
  if (j < 0)
    throw DomainViolation("flip_at_x: caravan column " + std::to_string(ec_col + 1) +
                          " has no empty site");
  Frame2 f{Coord{ec_col, row_lo}, 0, 1, 1, 0};
  line_exchange(em_, f, ell_, 0, 1, j - row_lo);
}

void FlipBuilder::horizontal_endgame(int row_lo) {
  const int L = geom_->side();
  if (find_column_empty(L, row_lo, -1) < 0) {
    // boundary sources can always supply the final shuttle vacancy
    int r = star().x[1] == row_lo ? row_lo + 1 : row_lo;
    em_.flip(Coord{L, r});
  }
  jump_horizontal(L - 2, L - 1, row_lo);
  em_.flip(star());
}

void FlipBuilder::turn_up(const Coord& box) {
  // entry: the empty line is the box's left column, the star just left of it
  const int bc0 = cg_.col0(box.x[0]);
  const int br0 = cg_.row0(box.x[1]);
  frame_left_to_bottom(box);
  {
    int sr = star().x[1];
    int sl = find_column_empty(bc0 - 1, br0, sr);
    if (sl < 0)
      throw DomainViolation("flip_at_x: no shuttle next to the star at the turn");
    int park = sl > sr ? sr + 1 : sr - 1;
    walk_vacancy_in_column(bc0 - 1, sl, park);
    em_.swap(Coord{bc0 - 1, sr}, Coord{bc0, sr});
    walk_vacancy_in_column(bc0 - 1, park, sl);
  }
  slide_star_in_column(bc0, br0 + 1);
  em_.swap(Coord{bc0, br0 + 1}, Coord{bc0 + 1, br0 + 1});
}

void FlipBuilder::caravan_to_boundary() {
  const auto& pv = path_.vertices;
  const int L = geom_->side();
  bool horizontal = true;
  int ec_pos = axi_ + ell_;  // the reservoir column starts as the jump column

  for (size_t t = 0; t < pv.size(); ++t) {
    const Coord& box = pv[t];
    const bool is_last = (t + 1 == pv.size());
    bool next_up = !is_last && pv[t + 1].x[1] == box.x[1] + 1;
    const int bc0 = cg_.col0(box.x[0]);
    const int br0 = cg_.row0(box.x[1]);

    if (horizontal) {
      int stop_col;
      if (is_last) {
        if (box.x[0] == cg_.N) {
          stop_col = L - 1;
        } else {
          stop_col = bc0;
          next_up = true;
        }
      } else {
        stop_col = next_up ? bc0 : bc0 + ell_ - 1;
      }
      while (ec_pos < stop_col) {
        caravan_step_right(ec_pos, br0);
        ++ec_pos;
      }
      if (is_last && box.x[0] == cg_.N) {
        horizontal_endgame(br0);
        return;
      }
      if (next_up) {
        turn_up(box);
        horizontal = false;
        ec_pos = br0;
      }
    }

    if (!horizontal) {
      int stop_row;
      bool exit_right = false;
      if (is_last) {
        if (box.x[1] == cg_.N) {
          stop_row = L - 1;
        } else {
          stop_row = br0;
          exit_right = true;
        }
      } else if (!next_up) {
        stop_row = br0;
        exit_right = true;
      } else {
        stop_row = br0 + ell_ - 1;
      }
      // cycles keep the star one row above the empty line
      const int cycle_stop = (is_last && box.x[1] == cg_.N) ? L - 2 : stop_row;
      while (ec_pos < cycle_stop) {
        int j = find_row_empty(ec_pos + 1, bc0, star().x[0]);
        if (j < 0)
          throw DomainViolation("flip_at_x: caravan row " + std::to_string(ec_pos + 1) +
                                " has no empty site");
        Frame2 f{Coord{bc0, ec_pos}, 1, 0, 0, 1};
        line_exchange(em_, f, ell_, 0, 1, j - bc0);
        ++ec_pos;
        jump_vertical(ec_pos - 1, ec_pos, bc0);
      }
      if (is_last && box.x[1] == cg_.N) {
        // final cycle: sweep the star down to L-2, then jump it onto the boundary
        {
          int j = find_row_empty(ec_pos + 1, bc0, star().x[0]);
          if (j < 0)
            throw DomainViolation("flip_at_x: caravan row " +
                                  std::to_string(ec_pos + 1) + " has no empty site");
          Frame2 f{Coord{bc0, ec_pos}, 1, 0, 0, 1};
          line_exchange(em_, f, ell_, 0, 1, j - bc0);
          ++ec_pos;
        }
        if (find_row_empty(L, bc0, star().x[0]) < 0) {
          int c = star().x[0] == bc0 ? bc0 + 1 : bc0;
          em_.flip(Coord{c, L});
        }
        jump_vertical(L - 2, L - 1, bc0);
        em_.flip(star());
        return;
      }
      if (exit_right) {
        // the empty line is the box's bottom row; turn back to horizontal
        frame_bottom_to_left(box);
        transport_in_framed_box(box, Coord{bc0 + 1, br0 + 1});
        {
          int j = find_column_empty(bc0 + 1, br0, star().x[1]);
          if (j < 0) throw DomainViolation("flip_at_x: turn column has no empty site");
          Frame2 f{Coord{bc0, br0}, 0, 1, 1, 0};
          line_exchange(em_, f, ell_, 0, 1, j - br0);
        }
        horizontal = true;
        ec_pos = bc0 + 1;
        if (is_last) {
          while (ec_pos < L - 1) {
            caravan_step_right(ec_pos, br0);
            ++ec_pos;
          }
          horizontal_endgame(br0);
          return;
        }
      }
    }
  }
  throw std::logic_error("flip_at_x: caravan failed to reach the boundary");
}

MoveScript FlipBuilder::build() {
  validate();

  MoveScript script;
  {
    std::vector<Coord> boxes = path_.vertices;
    boxes.push_back(i_);
    boxes.push_back(Coord{i_.x[0], i_.x[1] + 1});
    boxes.push_back(Coord{i_.x[0] + 1, i_.x[1] + 1});
    for (const Coord& j : boxes) {
      int c0 = cg_.col0(j.x[0]), r0 = cg_.row0(j.x[1]);
      for (int c = c0; c < c0 + ell_; ++c)
        for (int r = r0; r < r0 + ell_; ++r)
          script.declared_region.push_back(geom_->index(Coord{c, r}));
    }
    std::sort(script.declared_region.begin(), script.declared_region.end());
    script.declared_region.erase(
        std::unique(script.declared_region.begin(), script.declared_region.end()),
        script.declared_region.end());
    script.declared_domain =
        "coarse path and Q_i boxes good; flips the occupation at (" +
        std::to_string(x_.x[0]) + "," + std::to_string(x_.x[1]) + ")";
  }

  em_.track(geom_->index(x_));

  // first boundary line -> conveyor home + corner
  journey_to_p1();
  assemble_workspace();
  // second boundary line -> reservoir (P1's left column); its passage may
  // have displaced the workspace corner, so clear it again
  journey_to_p1();
  ensure_corner_empty();
  // carry x's value to B_i's rightmost column
  transport_star_out_of_box();
  // caravan to the boundary, payload flip there
  caravan_to_boundary();
  size_t payload = em_.step_count() - 1;
  // exact reversal of everything before the payload flip
  em_.append_reverse(0, payload);

  script.steps = em_.take();
  return script;
}

}  // namespace

MoveScript flip_at_x_script(const Configuration& cfg, const Geometry& geom,
                            const ModelParams& params, Coord x,
                            const UpRightPath& coarse_path, int ell) {
  FlipBuilder builder(cfg, geom, params, x, coarse_path, ell);
  return builder.build();
}

}  // namespace ka
