#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ka/config.hpp"
#include "ka/geometry.hpp"
#include "ka/model.hpp"
#include "ka/spectral.hpp"

namespace ka {

// Observable recorded along a trajectory.
struct ObservableSpec {
  enum class Kind { ParticleCount, HalfBoxCount, TestFunction };
  Kind kind = Kind::TestFunction;
  TestFunctionSpec test_function;

  static ObservableSpec particle_count() { return {Kind::ParticleCount, {}}; }
  static ObservableSpec half_box() { return {Kind::HalfBoxCount, {}}; }
  static ObservableSpec test_function_default(const ModelParams& params, int L, int d,
                                              double c = 0.1);
  std::string name() const;
};

struct Trajectory {
  std::vector<double> times;   // uniform grid, strictly increasing
  std::vector<double> values;  // observable at those times
  double sample_dt = 0.0;
  double horizon = 0.0;
  uint64_t seed = 0;
  int64_t events = 0;
  int d = 0, L = 0;
  ModelParams params;
  std::string observable;
  Configuration final_cfg;
};

struct SimulateOptions {
  double horizon = 100.0;
  double sample_dt = 0.1;
  uint64_t seed = 1;
  OutsideRule rule = OutsideRule::FormulaEmpty;
  // Start from this configuration; by default a fresh mu-sample per seed.
  std::optional<Configuration> initial;
};

// Continuous-time law: every bond and every boundary site carries a unit-rate
// clock; bond clocks attempt the exchange and accept iff the constraint
// holds, boundary clocks resample from Bernoulli(1-q).
Trajectory simulate(const Geometry& geom, const ModelParams& params,
                    const ObservableSpec& obs, const SimulateOptions& opt);

enum class TrelMethod { IntegratedAutocorrelation, ExponentialFit };

struct TrelEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  TrelMethod method = TrelMethod::IntegratedAutocorrelation;
  int replicas = 0;
};

struct TrelOptions {
  TrelMethod method = TrelMethod::IntegratedAutocorrelation;
  double burn_in_multiple = 10.0;  // x current T_rel estimate, iterated twice
  double window_factor = 6.0;      // self-consistent truncation window
};

// Integrated autocorrelation time (in the trajectory's time units) or an
// exponential fit of the autocorrelation tail, pooled over replicas. Throws
// HorizonTooShort when the autocorrelation cannot be resolved.
TrelEstimate estimate_trel(const std::vector<Trajectory>& trajectories,
                           const TrelOptions& opt = {});

// White-noise-calibrated integrated autocorrelation of a single series, in
// sample-step units (0.5 for i.i.d. data).
double integrated_autocorrelation_steps(const std::vector<double>& series,
                                        double window_factor = 6.0);

struct ScalingPoint {
  int L = 0;
  TrelEstimate trel;
  double horizon = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  double exponent = 0.0;        // least-squares slope of log T_rel vs log L
  double exponent_stderr = 0.0;
};

struct ScalingOptions {
  int replicas = 16;
  uint64_t seed = 1;
  int threads = 1;
  OutsideRule rule = OutsideRule::FormulaEmpty;
  ObservableSpec observable = ObservableSpec::test_function_default({2, 0.5}, 8, 2);
  double target_tau_multiple = 120.0;  // production horizon in units of tau
  TrelOptions trel;
};

// Per-L relaxation-time estimates with a pilot run to set the horizon, plus
// the fitted log-log exponent.
ScalingResult scaling_study(const ModelParams& params, const std::vector<int>& L_list,
                            int d, const ScalingOptions& opt);

}  // namespace ka
