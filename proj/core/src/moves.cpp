#include "ka/moves.hpp"

#include <algorithm>
#include <sstream>

#include "ka/moves_internal.hpp"

namespace ka {

// ---------------------------------------------------------------------------
// Verifier (replay engine; independent from the generators)
// ---------------------------------------------------------------------------

ScriptReport verify_script(const Configuration& cfg, const Geometry& geom,
                           const MoveScript& script, const ModelParams& params,
                           OutsideRule rule, const Configuration* expected_final) {
  ScriptReport report;
  report.step_count = static_cast<int64_t>(script.steps.size());
  Configuration state = cfg;
  const int64_t empty0 = cfg.num_empty();
  const bool has_region = !script.declared_region.empty();

  auto in_region = [&](int64_t s) {
    if (!has_region) return true;
    return std::binary_search(script.declared_region.begin(),
                              script.declared_region.end(), s);
  };

  int64_t barrier = 0;
  for (size_t t = 0; t < script.steps.size(); ++t) {
    const MoveStep& step = script.steps[t];
    if (step.kind == MoveStep::Kind::Exchange) {
      if (!geom.contains(step.a) || !geom.contains(step.b)) {
        report.illegal_index = static_cast<int64_t>(t);
        report.illegal_reason = "exchange endpoint outside Lambda";
        report.final_cfg = state;
        return report;
      }
      int64_t ia = geom.index(step.a), ib = geom.index(step.b);
      if (!geom.adjacent(ia, ib)) {
        report.illegal_index = static_cast<int64_t>(t);
        report.illegal_reason = "exchange endpoints not nearest neighbours";
        report.final_cfg = state;
        return report;
      }
      if (!in_region(ia) || !in_region(ib)) {
        report.illegal_index = static_cast<int64_t>(t);
        report.illegal_reason = "exchange outside the declared region";
        report.final_cfg = state;
        return report;
      }
      if (!constraint_satisfied(state, geom, ia, ib, params, rule)) {
        report.illegal_index = static_cast<int64_t>(t);
        report.illegal_reason = "kinetic constraint violated";
        report.final_cfg = state;
        return report;
      }
      state.swap_sites(ia, ib);
    } else {
      if (!geom.contains(step.a)) {
        report.illegal_index = static_cast<int64_t>(t);
        report.illegal_reason = "flip outside Lambda";
        report.final_cfg = state;
        return report;
      }
      int64_t ia = geom.index(step.a);
      if (!geom.is_boundary(ia)) {
        report.illegal_index = static_cast<int64_t>(t);
        report.illegal_reason = "flip off the inner boundary";
        report.final_cfg = state;
        return report;
      }
      if (!in_region(ia)) {
        report.illegal_index = static_cast<int64_t>(t);
        report.illegal_reason = "flip outside the declared region";
        report.final_cfg = state;
        return report;
      }
      state.flip(ia);
    }
    barrier = std::max(barrier, std::abs(state.num_empty() - empty0));
  }
  report.legal = true;
  report.energy_barrier = barrier;
  report.final_cfg = state;
  if (expected_final) report.final_matches_target = (state == *expected_final);
  return report;
}

std::string script_to_text(const MoveScript& script) {
  std::string out;
  for (const MoveStep& s : script.steps) {
    if (s.kind == MoveStep::Kind::Exchange) {
      out += "X " + std::to_string(s.a.x[0]) + ' ' + std::to_string(s.a.x[1]) + ' ' +
             std::to_string(s.b.x[0]) + ' ' + std::to_string(s.b.x[1]) + '\n';
    } else {
      out += "F " + std::to_string(s.a.x[0]) + ' ' + std::to_string(s.a.x[1]) + '\n';
    }
  }
  return out;
}

MoveScript script_from_text(const std::string& text) {
  MoveScript script;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    char kind;
    ls >> kind;
    if (kind == 'X') {
      int x1, y1, x2, y2;
      if (!(ls >> x1 >> y1 >> x2 >> y2))
        throw std::invalid_argument("script text: malformed exchange line");
      script.steps.push_back(MoveStep::exchange(Coord{x1, y1}, Coord{x2, y2}));
    } else if (kind == 'F') {
      int x1, y1;
      if (!(ls >> x1 >> y1)) throw std::invalid_argument("script text: malformed flip line");
      script.steps.push_back(MoveStep::flip(Coord{x1, y1}));
    } else {
      throw std::invalid_argument("script text: unknown step kind");
    }
  }
  return script;
}

// ---------------------------------------------------------------------------
// Shared generator machinery
// ---------------------------------------------------------------------------

namespace moves_internal {

void Emitter::swap(Coord a, Coord b) {
  int64_t ia = geom_->index(a), ib = geom_->index(b);
  // Generators are expected to emit steps that are legal even under the
  // strict in-Lambda neighbour count, so they stay legal under either rule.
  if (!constraint_satisfied(cfg_, *geom_, ia, ib, params_, OutsideRule::TextInLambda))
    throw std::logic_error("move generator emitted an illegal exchange at (" +
                           std::to_string(a.x[0]) + "," + std::to_string(a.x[1]) +
                           ")-(" + std::to_string(b.x[0]) + "," +
                           std::to_string(b.x[1]) + ")");
  steps_.push_back(MoveStep::exchange(a, b));
  cfg_.swap_sites(ia, ib);
  if (tracked_ == ia) {
    tracked_ = ib;
  } else if (tracked_ == ib) {
    tracked_ = ia;
  }
}

void Emitter::flip(Coord a) {
  int64_t ia = geom_->index(a);
  if (!geom_->is_boundary(ia))
    throw std::logic_error("move generator emitted a flip off the boundary at (" +
                           std::to_string(a.x[0]) + "," + std::to_string(a.x[1]) + ")");
  steps_.push_back(MoveStep::flip(a));
  cfg_.flip(ia);
}

void Emitter::append_reverse(size_t from, size_t to) {
  // Reversal of a step range replays the same steps in opposite order;
  // exchanges and flips are involutions.
  std::vector<MoveStep> tail(steps_.begin() + static_cast<ptrdiff_t>(from),
                             steps_.begin() + static_cast<ptrdiff_t>(to));
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) {
    if (it->kind == MoveStep::Kind::Exchange) {
      swap(it->a, it->b);
    } else {
      flip(it->a);
    }
  }
}

// Exchange the empty line {(u, v_e) : u in [0, ell)} with the adjacent line at
// v_p, given a designated empty cell (j, v_p). Emits a fixed step sequence
// (configuration-independent given j); every step is legal whenever the
// preconditions hold. The two lines swap contents exactly.
void line_exchange(Emitter& em, const Frame2& f, int ell, int v_e, int v_p, int j) {
  for (int i = j + 1; i < ell; ++i) {
    em.swap(f.at(i, v_p), f.at(i, v_e));
    em.swap(f.at(i - 1, v_e), f.at(i, v_e));
  }
  for (int i = ell - 1; i > j; --i) em.swap(f.at(i - 1, v_e), f.at(i, v_e));
  for (int i = j - 1; i >= 0; --i) {
    em.swap(f.at(i, v_p), f.at(i, v_e));
    em.swap(f.at(i, v_e), f.at(i + 1, v_e));
  }
  for (int i = 0; i < j; ++i) em.swap(f.at(i, v_e), f.at(i + 1, v_e));
}

// Walk a vacancy along line v from u_from to u_to; the adjacent line
// v_support must be entirely empty.
void vacancy_walk(Emitter& em, const Frame2& f, int v, int u_from, int u_to) {
  while (u_from > u_to) {
    em.swap(f.at(u_from - 1, v), f.at(u_from, v));
    --u_from;
  }
  while (u_from < u_to) {
    em.swap(f.at(u_from + 1, v), f.at(u_from, v));
    ++u_from;
  }
}

int leftmost_empty_in_line(const Emitter& em, const Frame2& f, int ell, int v) {
  for (int u = 0; u < ell; ++u) {
    if (em.cfg().empty_at(em.geom().index(f.at(u, v)))) return u;
  }
  return -1;
}

// Framing relative to the frame orientation: line v = 0 must be empty and
// every line must contain an empty site. Afterwards line v = 0 and column
// u = 0 are both empty.
void frame_box_oriented(Emitter& em, const Frame2& f, int ell) {
  for (int v = 0; v + 1 < ell; ++v) {
    int j = leftmost_empty_in_line(em, f, ell, v + 1);
    if (j < 0) throw DomainViolation("framing: a line has no empty site");
    line_exchange(em, f, ell, v, v + 1, j);
    vacancy_walk(em, f, v, j, 0);
  }
  for (int v = ell - 1; v >= 1; --v) line_exchange(em, f, ell, v, v - 1, 0);
}

// Swap the contents of (c, r) and (c+1, r), with the conveyor line r-1 empty
// and the reservoir cell (0, r) empty. Fixed steps; restores everything else.
void conveyor_swap(Emitter& em, const Frame2& f, int c, int r) {
  for (int w = 0; w <= c - 2; ++w) em.swap(f.at(w, r), f.at(w + 1, r));
  em.swap(f.at(c - 1, r), f.at(c, r));
  em.swap(f.at(c + 1, r), f.at(c + 1, r - 1));
  em.swap(f.at(c - 1, r), f.at(c, r));
  em.swap(f.at(c, r - 1), f.at(c + 1, r - 1));
  em.swap(f.at(c, r), f.at(c + 1, r));
  em.swap(f.at(c, r - 1), f.at(c, r));
  for (int w = c - 1; w >= 1; --w) em.swap(f.at(w - 1, r), f.at(w, r));
}

// Move the empty line from v = from to v = to by successive line exchanges;
// every data line must have its u = 0 cell empty (the perpendicular frame
// line), which the exchanges preserve.
void roll_empty_line(Emitter& em, const Frame2& f, int ell, int from, int to) {
  for (int v = from; v < to; ++v) line_exchange(em, f, ell, v, v + 1, 0);
  for (int v = from; v > to; --v) line_exchange(em, f, ell, v, v - 1, 0);
}

}  // namespace moves_internal

using namespace moves_internal;

// ---------------------------------------------------------------------------
// Claim generators (k = d = 2)
// ---------------------------------------------------------------------------

namespace {

void require_2d(const Geometry& geom, const ModelParams& params, const char* op) {
  if (geom.dim() != 2)
    throw std::invalid_argument(std::string(op) + ": requires d = 2");
  if (params.k != 2)
    throw std::invalid_argument(std::string(op) + ": requires k = 2");
}

std::vector<int64_t> strip_region(const Geometry& geom, int x_lo, int y_lo, int x_hi,
                                  int y_hi) {
  std::vector<int64_t> region;
  for (int x = x_lo; x <= x_hi; ++x) {
    for (int y = y_lo; y <= y_hi; ++y) {
      Coord c{x, y};
      if (!geom.contains(c)) throw std::invalid_argument("region outside Lambda");
      region.push_back(geom.index(c));
    }
  }
  std::sort(region.begin(), region.end());
  return region;
}

}  // namespace

MoveScript row_exchange_script(const Configuration& cfg, const Geometry& geom,
                               const ModelParams& params, Coord anchor, int ell) {
  require_2d(geom, params, "row_exchange_script");
  if (ell < 1) throw std::invalid_argument("row_exchange_script: ell >= 1");
  const int ax = anchor.x[0], ay = anchor.x[1];
  MoveScript script;
  script.declared_region = strip_region(geom, ax, ay, ax + ell - 1, ay + 1);
  script.declared_domain = "empty row at y=" + std::to_string(ay) + ", x in [" +
                           std::to_string(ax) + "," + std::to_string(ax + ell - 1) +
                           "]; row above has an empty site";

  Frame2 f{anchor, 1, 0, 0, 1};
  Emitter em(cfg, geom, params);
  for (int u = 0; u < ell; ++u) {
    if (cfg.occupied(geom.index(f.at(u, 0))))
      throw DomainViolation("row_exchange: designated row is not empty");
  }
  int j = leftmost_empty_in_line(em, f, ell, 1);
  if (j < 0) throw DomainViolation("row_exchange: row above has no empty site");
  line_exchange(em, f, ell, 0, 1, j);
  script.steps = em.take();
  return script;
}

MoveScript site_jump_script(const Configuration& cfg, const Geometry& geom,
                            const ModelParams& params, Coord column_anchor, int ell,
                            Coord star) {
  require_2d(geom, params, "site_jump_script");
  if (ell < 2) throw std::invalid_argument("site_jump_script: ell >= 2");
  const int cx = column_anchor.x[0], cy = column_anchor.x[1];
  if (star.x[0] != cx - 1 || star.x[1] < cy || star.x[1] >= cy + ell)
    throw std::invalid_argument("site_jump_script: star must lie in the left column");

  MoveScript script;
  script.declared_region = strip_region(geom, cx - 1, cy, cx + 1, cy + ell - 1);
  script.declared_domain = "empty column at x=" + std::to_string(cx) +
                           "; both side columns have an empty site besides star";

  // Frame: u along the column, v = -1/0/+1 across.
  Frame2 f{column_anchor, 0, 1, 1, 0};
  const int s = star.x[1] - cy;
  Emitter em(cfg, geom, params);

  for (int u = 0; u < ell; ++u) {
    if (cfg.occupied(geom.index(f.at(u, 0))))
      throw DomainViolation("site_jump: middle column is not empty");
  }
  auto find_shuttle = [&](int v) {
    int best = -1;
    for (int u = 0; u < ell; ++u) {
      if (u == s) continue;
      if (cfg.empty_at(geom.index(f.at(u, v)))) {
        if (best < 0 || std::abs(u - s) < std::abs(best - s)) best = u;
      }
    }
    return best;
  };
  int sm = find_shuttle(-1);
  int sp = find_shuttle(+1);
  if (sm < 0) throw DomainViolation("site_jump: left column has no empty site besides star");
  if (sp < 0) throw DomainViolation("site_jump: right column has no empty site besides star");

  auto shuttle_to = [&](int v, int from) {
    int target = from > s ? s + 1 : s - 1;
    int cur = from;
    while (cur > target) {
      em.swap(f.at(cur - 1, v), f.at(cur, v));
      --cur;
    }
    while (cur < target) {
      em.swap(f.at(cur + 1, v), f.at(cur, v));
      ++cur;
    }
    return target;
  };
  int pm = shuttle_to(-1, sm);
  int pp = shuttle_to(+1, sp);

  em.swap(f.at(s, -1), f.at(s, 0));
  em.swap(f.at(s, 0), f.at(s, +1));
  em.swap(f.at(s, -1), f.at(s, 0));

  // Return the shuttles so every other site is restored.
  auto shuttle_back = [&](int v, int at, int home) {
    int cur = at;
    while (cur > home) {
      em.swap(f.at(cur - 1, v), f.at(cur, v));
      --cur;
    }
    while (cur < home) {
      em.swap(f.at(cur + 1, v), f.at(cur, v));
      ++cur;
    }
  };
  shuttle_back(-1, pm, sm);
  shuttle_back(+1, pp, sp);

  script.steps = em.take();
  return script;
}

bool is_almost_good_box(const Configuration& cfg, const Geometry& geom,
                        const BoxSpec& box) {
  const int x0 = box.corner.x[0], y0 = box.corner.x[1];
  for (int y = y0; y < y0 + box.ell; ++y) {
    bool has_empty = false;
    for (int x = x0; x < x0 + box.ell; ++x)
      if (cfg.empty_at(geom.index(Coord{x, y}))) has_empty = true;
    if (!has_empty) return false;
  }
  for (int x = x0; x < x0 + box.ell; ++x) {
    bool has_empty = false;
    for (int y = y0; y < y0 + box.ell; ++y)
      if (cfg.empty_at(geom.index(Coord{x, y}))) has_empty = true;
    if (!has_empty) return false;
  }
  return true;
}

bool is_framed_box(const Configuration& cfg, const Geometry& geom, const BoxSpec& box) {
  const int x0 = box.corner.x[0], y0 = box.corner.x[1];
  for (int x = x0; x < x0 + box.ell; ++x)
    if (cfg.occupied(geom.index(Coord{x, y0}))) return false;
  for (int y = y0; y < y0 + box.ell; ++y)
    if (cfg.occupied(geom.index(Coord{x0, y}))) return false;
  return true;
}

MoveScript framing_script(const Configuration& cfg, const Geometry& geom,
                          const ModelParams& params, const BoxSpec& box) {
  require_2d(geom, params, "framing_script");
  const int x0 = box.corner.x[0], y0 = box.corner.x[1], ell = box.ell;
  MoveScript script;
  script.declared_region = strip_region(geom, x0, y0, x0 + ell - 1, y0 + ell - 1);
  script.declared_domain = "almost-good box with empty bottom row";

  if (!is_almost_good_box(cfg, geom, box))
    throw DomainViolation("framing: box is not almost good");
  for (int x = x0; x < x0 + ell; ++x) {
    if (cfg.occupied(geom.index(Coord{x, y0})))
      throw DomainViolation("framing: bottom row is not empty");
  }

  Frame2 f{box.corner, 1, 0, 0, 1};
  Emitter em(cfg, geom, params);
  frame_box_oriented(em, f, ell);
  script.steps = em.take();
  return script;
}

MoveScript reflection_script(const Configuration& cfg, const Geometry& geom,
                             const ModelParams& params, const BoxSpec& box) {
  require_2d(geom, params, "reflection_script");
  const int ell = box.ell;
  MoveScript script;
  script.declared_region = strip_region(geom, box.corner.x[0], box.corner.x[1],
                                        box.corner.x[0] + ell - 1,
                                        box.corner.x[1] + ell - 1);
  script.declared_domain = "framed box (empty bottom row and left column)";
  if (!is_framed_box(cfg, geom, box))
    throw DomainViolation("reflection: box is not framed");

  // The steps below depend only on the box geometry: the interior transpose
  // is routed as within-column, within-row, within-column permutations, each
  // realized by adjacent swaps next to a parked conveyor line.
  Frame2 f{box.corner, 1, 0, 0, 1};
  Frame2 ft = f.transposed();
  Emitter em(cfg, geom, params);
  const int m = ell - 1;

  auto bubble = [&](std::vector<int> tgt, const Frame2& frame, int line) {
    // Adjacent transpositions sorting tgt ascending; the physical pair for
    // bookkeeping index r is (r+1, line), (r+2, line) in frame coordinates.
    bool moved = true;
    while (moved) {
      moved = false;
      for (int r = 0; r + 1 < m; ++r) {
        if (tgt[static_cast<size_t>(r)] > tgt[static_cast<size_t>(r + 1)]) {
          conveyor_swap(em, frame, r + 1, line);
          std::swap(tgt[static_cast<size_t>(r)], tgt[static_cast<size_t>(r + 1)]);
          moved = true;
        }
      }
    }
  };

  if (m > 1) {
    // Stage 1: within interior column c, row r -> (r+c) mod m.
    for (int c = 0; c < m; ++c) {
      std::vector<int> tgt(static_cast<size_t>(m));
      for (int r = 0; r < m; ++r) tgt[static_cast<size_t>(r)] = (r + c) % m;
      roll_empty_line(em, ft, ell, 0, c);
      bubble(tgt, ft, c + 1);
      roll_empty_line(em, ft, ell, c, 0);
    }
    // Stage 2: within interior row w, column c -> (w-c) mod m.
    for (int w = 0; w < m; ++w) {
      std::vector<int> tgt(static_cast<size_t>(m));
      for (int c = 0; c < m; ++c) tgt[static_cast<size_t>(c)] = ((w - c) % m + m) % m;
      roll_empty_line(em, f, ell, 0, w);
      bubble(tgt, f, w + 1);
      roll_empty_line(em, f, ell, w, 0);
    }
    // Stage 3: within interior column r, row rho -> (rho-r) mod m.
    for (int c = 0; c < m; ++c) {
      std::vector<int> tgt(static_cast<size_t>(m));
      for (int rho = 0; rho < m; ++rho)
        tgt[static_cast<size_t>(rho)] = ((rho - c) % m + m) % m;
      roll_empty_line(em, ft, ell, 0, c);
      bubble(tgt, ft, c + 1);
      roll_empty_line(em, ft, ell, c, 0);
    }
  }
  script.steps = em.take();
  return script;
}

}  // namespace ka
