#include <cmath>
#include <map>
#include <stdexcept>

#include "doctest.h"
#include "ka/dynamics.hpp"
#include "ka/errors.hpp"
#include "ka/rng.hpp"
#include "ka/spectral.hpp"

using namespace ka;

TEST_CASE("frozen dynamics at q=0 from the fully occupied state") {
  Geometry g(2, 5);
  ModelParams p{2, 0.0};
  SimulateOptions so;
  so.horizon = 50;
  so.sample_dt = 0.5;
  so.seed = 3;
  so.initial = Configuration(g.size(), true);
  Trajectory tr = simulate(g, p, ObservableSpec::particle_count(), so);
  for (double v : tr.values) CHECK(v == doctest::Approx(25.0));
  CHECK(tr.final_cfg == *so.initial);
}

TEST_CASE("SSEP stationary vacancy fraction matches q") {
  Geometry g(2, 8);
  ModelParams p{1, 0.3};
  MeanAccumulator acc;
  for (int r = 0; r < 60; ++r) {
    SimulateOptions so;
    so.horizon = 30;
    so.sample_dt = 30;
    so.seed = 100 + r;
    Trajectory tr = simulate(g, p, ObservableSpec::particle_count(), so);
    acc.add(static_cast<double>(tr.final_cfg.num_empty()) / g.size());
  }
  CHECK(std::abs(acc.mean() - 0.3) < 3 * acc.stderr_of_mean() + 1e-9);
}

TEST_CASE("stationarity: vacancy density and pair correlation under the product measure") {
  Geometry g(2, 8);
  ModelParams p{2, 0.5};
  MeanAccumulator vac, pair;
  int64_t total_events = 0;
  for (int r = 0; r < 120; ++r) {
    SimulateOptions so;
    so.horizon = 60;
    so.sample_dt = 60;
    so.seed = 500 + r;
    Trajectory tr = simulate(g, p, ObservableSpec::particle_count(), so);
    total_events += tr.events;
    vac.add(static_cast<double>(tr.final_cfg.num_empty()) / g.size());
    double acc = 0;
    for (const Bond& b : g.bonds())
      acc += tr.final_cfg.occupied(b.a) && tr.final_cfg.occupied(b.b) ? 1.0 : 0.0;
    pair.add(acc / static_cast<double>(g.bonds().size()));
  }
  CHECK(total_events > 1000000);
  CHECK(std::abs(vac.mean() - 0.5) < 3 * vac.stderr_of_mean());
  CHECK(std::abs(pair.mean() - 0.25) < 3 * pair.stderr_of_mean());
}

TEST_CASE("time average of the vacancy count is q L^2") {
  Geometry g(2, 8);
  ModelParams p{2, 0.5};
  SimulateOptions so;
  so.horizon = 4000;
  so.sample_dt = 1.0;
  so.seed = 11;
  Trajectory tr = simulate(g, p, ObservableSpec::particle_count(), so);
  MeanAccumulator acc;
  for (double v : tr.values) acc.add(64.0 - v);
  // crude 3-sigma band using the integrated-autocorrelation inflation
  double tau_steps = integrated_autocorrelation_steps(tr.values);
  double se = std::sqrt(acc.variance() * 2 * tau_steps / tr.values.size());
  CHECK(std::abs(acc.mean() - 32.0) < 3 * se + 1e-9);
}

TEST_CASE("determinism: identical seeds give identical trajectories") {
  Geometry g(2, 6);
  ModelParams p{2, 0.4};
  SimulateOptions so;
  so.horizon = 20;
  so.sample_dt = 0.1;
  so.seed = 99;
  Trajectory a = simulate(g, p, ObservableSpec::half_box(), so);
  Trajectory b = simulate(g, p, ObservableSpec::half_box(), so);
  CHECK(a.times == b.times);
  CHECK(a.values == b.values);
  CHECK(a.final_cfg == b.final_cfg);
  CHECK(a.events == b.events);
  so.seed = 100;
  Trajectory c = simulate(g, p, ObservableSpec::half_box(), so);
  CHECK(a.final_cfg != c.final_cfg);
}

TEST_CASE("first-transition frequencies match the generator rates") {
  // Exactness of the event-driven scheme on a tiny system: conditioned on a
  // state change within a short window, the new state is distributed like the
  // jump rates, up to O(rate * h).
  Geometry g(2, 2);
  ModelParams p{2, 0.5};
  Rng seed_rng(7);
  Configuration start(g.size());
  start.set(0, true);
  start.set(3, true);

  SpectralModel m = build_generator(g, p);
  uint64_t start_mask = 0;
  for (int64_t s = 0; s < 4; ++s)
    if (start.occupied(s)) start_mask |= uint64_t(1) << s;
  std::map<uint64_t, double> rates;
  double total_rate = 0;
  for (int64_t e = m.row_ptr[start_mask]; e < m.row_ptr[start_mask + 1]; ++e) {
    rates[static_cast<uint64_t>(m.target[static_cast<size_t>(e)])] +=
        m.rate[static_cast<size_t>(e)];
    total_rate += m.rate[static_cast<size_t>(e)];
  }

  const double h = 0.004;
  const int runs = 400000;
  std::map<uint64_t, int64_t> counts;
  int64_t changed = 0;
  for (int r = 0; r < runs; ++r) {
    SimulateOptions so;
    so.horizon = h;
    so.sample_dt = h;
    so.seed = seed_rng.next_u64();
    so.initial = start;
    Trajectory tr = simulate(g, p, ObservableSpec::particle_count(), so);
    uint64_t mask = 0;
    for (int64_t s = 0; s < 4; ++s)
      if (tr.final_cfg.occupied(s)) mask |= uint64_t(1) << s;
    if (mask != start_mask) {
      ++counts[mask];
      ++changed;
    }
  }
  CHECK(changed > 2000);
  for (const auto& [mask, rate] : rates) {
    double expected = rate / total_rate;
    double observed = static_cast<double>(counts[mask]) / changed;
    double sigma = std::sqrt(expected * (1 - expected) / changed);
    // 4-sigma plus the O(total_rate * h) discretization allowance
    CHECK(std::abs(observed - expected) < 4 * sigma + total_rate * h);
  }
}

TEST_CASE("integrated autocorrelation of white noise is one half") {
  Rng rng(21);
  std::vector<double> series(20000);
  for (auto& v : series) v = rng.uniform();
  double tau = integrated_autocorrelation_steps(series);
  CHECK(tau == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("estimate_trel agrees with exact diagonalization within a factor 2") {
  ModelParams p{2, 0.5};
  for (int L : {2, 3}) {
    Geometry g(2, L);
    double trel_exact = 1.0 / exact_gap(build_generator(g, p));
    std::vector<Trajectory> trs;
    for (int r = 0; r < 8; ++r) {
      SimulateOptions so;
      so.horizon = 2500;
      so.sample_dt = 0.25;
      so.seed = 300 * L + r;
      trs.push_back(simulate(g, p, ObservableSpec::particle_count(), so));
    }
    TrelOptions to;
    to.burn_in_multiple = 0;
    TrelEstimate e = estimate_trel(trs, to);
    CHECK(e.value > trel_exact / 2);
    CHECK(e.value < trel_exact * 2);
  }
}

TEST_CASE("horizon-too-short reports a suggestion") {
  Geometry g(2, 8);
  ModelParams p{2, 0.5};
  SimulateOptions so;
  so.horizon = 3.0;
  so.sample_dt = 0.1;
  so.seed = 17;
  Trajectory tr = simulate(g, p, ObservableSpec::half_box(), so);
  TrelOptions to;
  to.burn_in_multiple = 0;
  try {
    estimate_trel({tr}, to);
    // a window may close on rare noise realisations; accept but don't require
  } catch (const HorizonTooShort& e) {
    CHECK(e.suggested_horizon > so.horizon);
  }
}

TEST_CASE("SSEP control: diffusive exponent") {
  ScalingOptions opt;
  opt.replicas = 10;
  opt.seed = 4242;
  opt.threads = 2;
  ScalingResult r = scaling_study(ModelParams{1, 0.5}, {8, 16, 32}, 2, opt);
  CHECK(r.exponent > 1.8);
  CHECK(r.exponent < 2.2);
}

TEST_CASE("scaling study validates its input") {
  ScalingOptions opt;
  CHECK_THROWS_AS(scaling_study(ModelParams{2, 0.5}, {8, 16}, 2, opt),
                  std::invalid_argument);
}
