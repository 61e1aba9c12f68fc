#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ka/config.hpp"
#include "ka/frameability.hpp"
#include "ka/geometry.hpp"
#include "ka/model.hpp"
#include "ka/percolation.hpp"

namespace ka {

// A generator refused to build a script because the configuration is outside
// the operation's domain.
class DomainViolation : public std::runtime_error {
 public:
  explicit DomainViolation(const std::string& what) : std::runtime_error(what) {}
};

struct MoveStep {
  enum class Kind { Exchange, Flip };
  Kind kind = Kind::Exchange;
  Coord a;
  Coord b;  // second endpoint for exchanges

  static MoveStep exchange(Coord x, Coord y) { return {Kind::Exchange, x, y}; }
  static MoveStep flip(Coord x) { return {Kind::Flip, x, x}; }
};

struct MoveScript {
  std::vector<MoveStep> steps;
  std::vector<int64_t> declared_region;  // sorted linear site indices
  std::string declared_domain;
};

struct ScriptReport {
  bool legal = false;
  int64_t illegal_index = -1;
  std::string illegal_reason;
  int64_t energy_barrier = 0;  // max |#empty(M_t) - #empty(eta)|
  int64_t step_count = 0;
  std::optional<bool> final_matches_target;
  Configuration final_cfg;
};

// Replays the script step by step: every exchange must be a legal KA move at
// execution time, every flip must hit the inner boundary of Lambda, and every
// step must stay inside the declared region (when one is declared).
ScriptReport verify_script(const Configuration& cfg, const Geometry& geom,
                           const MoveScript& script, const ModelParams& params,
                           OutsideRule rule = OutsideRule::FormulaEmpty,
                           const Configuration* expected_final = nullptr);

// Text form: one step per line, "X x1 y1 x2 y2" or "F x y". Steps only;
// region and domain metadata are not serialized.
std::string script_to_text(const MoveScript& script);
MoveScript script_from_text(const std::string& text);

// Documented hard caps on script lengths, asserted by the test suite.
inline constexpr int64_t kRowExchangeStepFactor = 3;    // <= 3 ell
inline constexpr int64_t kSiteJumpStepFactor = 4;       // <= 4 ell
inline constexpr int64_t kFramingStepFactor = 8;        // <= 8 ell^2
inline constexpr int64_t kReflectionStepFactor = 16;    // <= 16 ell^4
inline constexpr int64_t kFlipAtXStepFactor = 64;       // <= 64 N ell^4

// Exchanging an empty row with the row above it (which must contain at least
// one empty site). anchor = lowest site of the empty row, which spans
// anchor + [ell] x {0}; the pattern row is anchor + [ell] x {1}.
MoveScript row_exchange_script(const Configuration& cfg, const Geometry& geom,
                               const ModelParams& params, Coord anchor, int ell);

// Moving a marked site across an empty column: column_anchor + {0} x [ell] is
// empty, star sits in the left-adjacent column, and both adjacent columns
// contain an empty site besides star's row. Final state: occupation values at
// star and star + (2,0) exchanged, everything else restored.
MoveScript site_jump_script(const Configuration& cfg, const Geometry& geom,
                            const ModelParams& params, Coord column_anchor, int ell,
                            Coord star);

// Framing an almost-good box whose bottom row is empty: the final state has
// the bottom row and the left column empty.
MoveScript framing_script(const Configuration& cfg, const Geometry& geom,
                          const ModelParams& params, const BoxSpec& box);

// Reflecting a framed box along its main diagonal. The emitted steps depend
// only on the box, never on the configuration.
MoveScript reflection_script(const Configuration& cfg, const Geometry& geom,
                             const ModelParams& params, const BoxSpec& box);

// Composite move flipping the occupation at x: boundary vacancy creation,
// propagation along the coarse path, transport of x's value to the boundary,
// one boundary flip, and the exact reversal of the transport. The coarse path
// must start at i+e1 (i the box of x), move up-right, and end on the coarse
// boundary; all path boxes and Q_i boxes must be good for cfg.
MoveScript flip_at_x_script(const Configuration& cfg, const Geometry& geom,
                            const ModelParams& params, Coord x,
                            const UpRightPath& coarse_path, int ell);

// Predicate used by the framing domain: at least one empty site in every row
// and every column of the box.
bool is_almost_good_box(const Configuration& cfg, const Geometry& geom,
                        const BoxSpec& box);
bool is_framed_box(const Configuration& cfg, const Geometry& geom, const BoxSpec& box);

}  // namespace ka
