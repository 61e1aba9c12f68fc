#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ka/config.hpp"
#include "ka/estimate.hpp"
#include "ka/geometry.hpp"
#include "ka/model.hpp"

namespace ka {

// Explicit generator of the finite chain, states = all occupancy masks over
// Lambda. Exchange transitions carry rate 1 when the constraint holds; each
// boundary site flips at rate (1-eta_x)(1-q) + eta_x q.
struct SpectralModel {
  int d = 0, L = 0;
  ModelParams params;
  OutsideRule rule = OutsideRule::FormulaEmpty;
  int64_t n_states = 0;
  std::vector<double> weights;  // mu per state, sums to 1
  // CSR transitions: row_ptr[s]..row_ptr[s+1] index (target, rate) pairs.
  std::vector<int64_t> row_ptr;
  std::vector<int32_t> target;
  std::vector<double> rate;

  double out_rate(int64_t s) const {
    double r = 0;
    for (int64_t e = row_ptr[static_cast<size_t>(s)];
         e < row_ptr[static_cast<size_t>(s) + 1]; ++e)
      r += rate[static_cast<size_t>(e)];
    return r;
  }
};

inline constexpr int kDefaultSiteBudget = 16;

// Throws BudgetExceeded when |Lambda| exceeds the site budget.
SpectralModel build_generator(const Geometry& geom, const ModelParams& params,
                              OutsideRule rule = OutsideRule::FormulaEmpty,
                              int site_budget = kDefaultSiteBudget);

// Smallest nonzero eigenvalue of -L in the mu-weighted symmetric form. Dense
// eigensolve for small state spaces, deflated Lanczos above that. Reports
// NumericalError if the second eigenvalue is degenerate with zero.
double exact_gap(const SpectralModel& model);

// All eigenvalues of -L (dense path only), ascending; for regression dumps.
std::vector<double> exact_spectrum(const SpectralModel& model);

// Function on configurations with optional cheap local differences.
class ConfigFunction {
 public:
  virtual ~ConfigFunction() = default;
  virtual double value(const Configuration& cfg) const = 0;
  // f(eta^{xy}) - f(eta); default recomputes globally.
  virtual double delta_exchange(const Configuration& cfg, const Geometry& geom,
                                int64_t x, int64_t y) const;
  // f(eta with x occupied) - f(eta with x empty).
  virtual double delta_occupation(const Configuration& cfg, const Geometry& geom,
                                  int64_t x) const;
};

class LambdaFunction : public ConfigFunction {
 public:
  explicit LambdaFunction(std::function<double(const Configuration&)> fn)
      : fn_(std::move(fn)) {}
  double value(const Configuration& cfg) const override { return fn_(cfg); }

 private:
  std::function<double(const Configuration&)> fn_;
};

// Exact (full enumeration) Dirichlet form and variance on a spectral model.
double dirichlet_form_exact(const SpectralModel& model, const Geometry& geom,
                            const ConfigFunction& f);
double variance_exact(const SpectralModel& model, const Geometry& geom,
                      const ConfigFunction& f);

// Monte Carlo versions: product-measure sampling, uniform bond/boundary
// subsampling with importance reweighting, batch-means error bars.
struct McOptions {
  int64_t samples = 10000;
  int batches = 32;
  uint64_t seed = 1;
};
Estimate dirichlet_form_mc(const Geometry& geom, const ModelParams& params,
                           OutsideRule rule, const ConfigFunction& f,
                           const McOptions& opt);
Estimate variance_mc(const Geometry& geom, const ModelParams& params,
                     const ConfigFunction& f, const McOptions& opt);

// m(q): floor(c q^{-1/(d-1)}) for k = 2, floor(exp_{(k-2)}(c q^{-1/(d-k+1)}))
// for k >= 3.
int64_t m_scale(double q, int k, int d, double c);

// Smooth bump profile supported in [0.1, 0.9]^d: product over coordinates of
// exp(-1/(s(1-s))) with s the rescaled coordinate.
double bump_profile(const Coord& u_times_L, int L, int d);

struct TestFunctionSpec {
  int m = 1;
  bool include_phantom_outside = false;
};

// f(eta) = sum_x g(r_x(eta)/L) eta_x with r_x the effective position from
// k-neighbour bootstrap in the local box of radius m.
class TestFunction : public ConfigFunction {
 public:
  TestFunction(const Geometry& geom, const ModelParams& params, TestFunctionSpec spec);
  double value(const Configuration& cfg) const override;
  double delta_exchange(const Configuration& cfg, const Geometry& geom, int64_t x,
                        int64_t y) const override;
  double delta_occupation(const Configuration& cfg, const Geometry& geom,
                          int64_t x) const override;
  double site_term(const Configuration& cfg, int64_t x) const;
  int m() const { return spec_.m; }

 private:
  const Geometry* geom_;
  ModelParams params_;
  TestFunctionSpec spec_;
  std::vector<double> g_table_;  // g(site / L) per site
};

double evaluate_test_function(const Configuration& cfg, const Geometry& geom,
                              const ModelParams& params, const TestFunctionSpec& spec);

enum class RayleighMode { Exact, MonteCarlo };

struct RayleighResult {
  RayleighMode mode = RayleighMode::MonteCarlo;
  Estimate variance;
  Estimate dirichlet;
  std::optional<Estimate> ratio;  // empty when D is consistent with zero
  bool unbounded_below_confidence = false;
};

// Var(f)/D(f): a lower bound on T_rel up to statistical error. Exact mode
// when the state space fits the site budget.
RayleighResult rayleigh_lower_bound(const Geometry& geom, const ModelParams& params,
                                    OutsideRule rule, const TestFunctionSpec& spec,
                                    const McOptions& opt,
                                    int site_budget = kDefaultSiteBudget);

}  // namespace ka
