#include "ka/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ka/errors.hpp"
#include "ka/parallel.hpp"
#include "ka/rng.hpp"

namespace ka {

ObservableSpec ObservableSpec::test_function_default(const ModelParams& params, int L,
                                                     int d, double c) {
  ObservableSpec spec;
  spec.kind = Kind::TestFunction;
  int64_t m = 1;
  try {
    m = m_scale(params.q, params.k, d, c);
  } catch (const std::exception&) {
    m = 1;
  }
  m = std::max<int64_t>(1, std::min<int64_t>(m, L / 4));
  spec.test_function.m = static_cast<int>(std::max<int64_t>(1, m));
  return spec;
}

std::string ObservableSpec::name() const {
  switch (kind) {
    case Kind::ParticleCount:
      return "particle-count";
    case Kind::HalfBoxCount:
      return "half-box-count";
    case Kind::TestFunction:
      return "test-function-m" + std::to_string(test_function.m);
  }
  return "unknown";
}

namespace {

// Incremental observable evaluation over the running configuration.
class ObservableTracker {
 public:
  ObservableTracker(const ObservableSpec& spec, const Geometry& geom,
                    const ModelParams& params)
      : spec_(spec), geom_(&geom) {
    if (spec.kind == ObservableSpec::Kind::TestFunction)
      tf_.emplace(geom, params, spec.test_function);
    if (spec.kind == ObservableSpec::Kind::HalfBoxCount) {
      in_half_.resize(static_cast<size_t>(geom.size()));
      for (int64_t s = 0; s < geom.size(); ++s)
        in_half_[static_cast<size_t>(s)] = geom.coord(s).x[0] <= geom.side() / 2;
    }
  }

  void reset(const Configuration& cfg) {
    count_ = 0;
    switch (spec_.kind) {
      case ObservableSpec::Kind::ParticleCount:
        count_ = cfg.num_occupied();
        break;
      case ObservableSpec::Kind::HalfBoxCount:
        for (int64_t s = 0; s < geom_->size(); ++s)
          if (in_half_[static_cast<size_t>(s)] && cfg.occupied(s)) ++count_;
        break;
      case ObservableSpec::Kind::TestFunction:
        break;
    }
  }

  void on_exchange(const Configuration& cfg, int64_t a, int64_t b) {
    if (spec_.kind == ObservableSpec::Kind::HalfBoxCount) {
      // cfg is the post-exchange state.
      bool ha = in_half_[static_cast<size_t>(a)], hb = in_half_[static_cast<size_t>(b)];
      if (ha != hb) {
        int64_t gained = (ha ? cfg.occupied(a) : cfg.occupied(b)) ? 1 : 0;
        int64_t lost = (ha ? cfg.occupied(b) : cfg.occupied(a)) ? 1 : 0;
        count_ += gained - lost;
      }
    }
  }

  void on_set(int64_t s, bool before, bool after) {
    if (before == after) return;
    int64_t d = after ? 1 : -1;
    if (spec_.kind == ObservableSpec::Kind::ParticleCount) count_ += d;
    if (spec_.kind == ObservableSpec::Kind::HalfBoxCount && in_half_[static_cast<size_t>(s)])
      count_ += d;
  }

  double value(const Configuration& cfg) const {
    if (spec_.kind == ObservableSpec::Kind::TestFunction) return tf_->value(cfg);
    return static_cast<double>(count_);
  }

 private:
  ObservableSpec spec_;
  const Geometry* geom_;
  std::optional<TestFunction> tf_;
  std::vector<uint8_t> in_half_;
  int64_t count_ = 0;
};

}  // namespace

Trajectory simulate(const Geometry& geom, const ModelParams& params,
                    const ObservableSpec& obs, const SimulateOptions& opt) {
  if (!(opt.horizon > 0)) throw std::invalid_argument("simulate: horizon > 0 required");
  if (!(opt.sample_dt > 0)) throw std::invalid_argument("simulate: sample_dt > 0 required");

  Rng rng(opt.seed);
  Configuration cfg =
      opt.initial ? *opt.initial : sample_configuration(geom, params, rng);
  if (cfg.size() != geom.size()) throw std::invalid_argument("simulate: bad initial state");

  const auto& bonds = geom.bonds();
  const auto& bsites = geom.boundary_sites();
  const uint64_t n_bonds = bonds.size();
  const uint64_t n_clocks = n_bonds + bsites.size();
  const double total_rate = static_cast<double>(n_clocks);
  const double p_occ = 1.0 - params.q;
  const int need = params.k - 1;

  ObservableTracker tracker(obs, geom, params);
  tracker.reset(cfg);

  Trajectory traj;
  traj.sample_dt = opt.sample_dt;
  traj.horizon = opt.horizon;
  traj.seed = opt.seed;
  traj.d = geom.dim();
  traj.L = geom.side();
  traj.params = params;
  traj.observable = obs.name();
  const int64_t n_samples = static_cast<int64_t>(opt.horizon / opt.sample_dt);
  traj.times.reserve(static_cast<size_t>(n_samples));
  traj.values.reserve(static_cast<size_t>(n_samples));

  double t = 0.0;
  int64_t next_sample = 1;

  auto record_until = [&](double t_now) {
    while (next_sample <= n_samples &&
           static_cast<double>(next_sample) * opt.sample_dt <= t_now) {
      traj.times.push_back(static_cast<double>(next_sample) * opt.sample_dt);
      traj.values.push_back(tracker.value(cfg));
      ++next_sample;
    }
  };

  while (true) {
    t += rng.exponential(total_rate);
    record_until(std::min(t, opt.horizon));
    if (t >= opt.horizon || next_sample > n_samples) break;
    uint64_t clock = rng.uniform_below(n_clocks);
    ++traj.events;
    if (clock < n_bonds) {
      const Bond& b = bonds[clock];
      if (cfg.occupied(b.a) == cfg.occupied(b.b)) continue;
      if (need > 0) {
        if (empty_neighbors(cfg, geom, b.a, b.b, opt.rule) < need) continue;
        if (empty_neighbors(cfg, geom, b.b, b.a, opt.rule) < need) continue;
      }
      cfg.swap_sites(b.a, b.b);
      tracker.on_exchange(cfg, b.a, b.b);
    } else {
      int64_t x = bsites[clock - n_bonds];
      bool before = cfg.occupied(x);
      bool after = rng.bernoulli(p_occ);
      cfg.set(x, after);
      tracker.on_set(x, before, after);
    }
  }
  traj.final_cfg = cfg;
  return traj;
}

namespace {

struct SeriesStats {
  double mean = 0.0;
  double var = 0.0;  // population variance
};

SeriesStats series_stats(const std::vector<double>& v, size_t from) {
  SeriesStats s;
  size_t n = v.size() - from;
  if (n == 0) return s;
  for (size_t i = from; i < v.size(); ++i) s.mean += v[i];
  s.mean /= static_cast<double>(n);
  for (size_t i = from; i < v.size(); ++i) {
    double d = v[i] - s.mean;
    s.var += d * d;
  }
  s.var /= static_cast<double>(n);
  return s;
}

// Normalized autocorrelation at the given lags, from `from` onwards.
std::vector<double> autocorrelation(const std::vector<double>& v, size_t from,
                                    size_t max_lag) {
  SeriesStats st = series_stats(v, from);
  size_t n = v.size() - from;
  std::vector<double> rho(max_lag + 1, 0.0);
  if (st.var <= 0 || n < 2) return rho;
  for (size_t lag = 0; lag <= max_lag && lag < n; ++lag) {
    double acc = 0;
    for (size_t i = from; i + lag < v.size(); ++i)
      acc += (v[i] - st.mean) * (v[i + lag] - st.mean);
    rho[lag] = acc / (static_cast<double>(n - lag) * st.var);
  }
  return rho;
}

// Sokal self-consistent window: smallest W with W >= window_factor * tau(W).
double tau_int_steps(const std::vector<double>& rho, double window_factor, size_t n,
                     double* ms_stderr) {
  double tau = 0.5;
  size_t W = 1;
  for (; W < rho.size(); ++W) {
    tau += rho[W];
    if (static_cast<double>(W) >= window_factor * tau) break;
  }
  if (ms_stderr) {
    // Madras-Sokal variance estimate.
    *ms_stderr = tau * std::sqrt(2.0 * (2.0 * static_cast<double>(W) + 1.0) /
                                 static_cast<double>(std::max<size_t>(n, 1)));
  }
  if (W >= rho.size()) return -1.0;  // window never closed
  return tau;
}

}  // namespace

double integrated_autocorrelation_steps(const std::vector<double>& series,
                                        double window_factor) {
  std::vector<double> rho =
      autocorrelation(series, 0, std::min<size_t>(series.size() / 2, 4000));
  double tau = tau_int_steps(rho, window_factor, series.size(), nullptr);
  if (tau < 0)
    throw HorizonTooShort("integrated autocorrelation window did not close",
                          static_cast<double>(series.size()) * 4);
  return tau;
}

TrelEstimate estimate_trel(const std::vector<Trajectory>& trajectories,
                           const TrelOptions& opt) {
  if (trajectories.empty()) throw std::invalid_argument("estimate_trel: no data");
  const double dt = trajectories.front().sample_dt;

  // Self-consistent burn-in: start from zero, re-estimate twice.
  double tau_guess = dt;
  double tau_ms = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    MeanAccumulator acc;
    for (const Trajectory& tr : trajectories) {
      size_t burn = static_cast<size_t>(opt.burn_in_multiple * tau_guess / dt);
      if (burn + 16 >= tr.values.size())
        throw HorizonTooShort("burn-in consumes the trajectory",
                              tr.horizon * 4.0);
      size_t n = tr.values.size() - burn;
      std::vector<double> rho = autocorrelation(tr.values, burn, std::min(n / 3, size_t(4000)));
      double ms = 0;
      double tau = tau_int_steps(rho, opt.window_factor, n, &ms);
      if (tau < 0)
        throw HorizonTooShort("autocorrelation not resolved within horizon",
                              tr.horizon * 4.0);
      acc.add(tau * dt);
      tau_ms = std::max(tau_ms, ms * dt);
    }
    tau_guess = acc.mean();
  }

  if (opt.method == TrelMethod::IntegratedAutocorrelation) {
    MeanAccumulator acc;
    for (const Trajectory& tr : trajectories) {
      size_t burn = static_cast<size_t>(opt.burn_in_multiple * tau_guess / dt);
      if (burn + 16 >= tr.values.size())
        throw HorizonTooShort("burn-in consumes the trajectory", tr.horizon * 4.0);
      size_t n = tr.values.size() - burn;
      std::vector<double> rho = autocorrelation(tr.values, burn, std::min(n / 3, size_t(4000)));
      double tau = tau_int_steps(rho, opt.window_factor, n, nullptr);
      if (tau < 0)
        throw HorizonTooShort("autocorrelation not resolved within horizon",
                              tr.horizon * 4.0);
      acc.add(tau * dt);
    }
    TrelEstimate e;
    e.value = acc.mean();
    e.stderr_ = trajectories.size() >= 4 ? acc.stderr_of_mean() : tau_ms;
    e.method = TrelMethod::IntegratedAutocorrelation;
    e.replicas = static_cast<int>(trajectories.size());
    return e;
  }

  // Exponential fit of the pooled autocorrelation tail, rho in [0.05, 0.8].
  size_t burn = static_cast<size_t>(opt.burn_in_multiple * tau_guess / dt);
  size_t max_lag = 0;
  for (const Trajectory& tr : trajectories)
    max_lag = std::max(max_lag, (tr.values.size() - burn) / 3);
  max_lag = std::min(max_lag, size_t(8000));
  std::vector<double> pooled(max_lag + 1, 0.0);
  for (const Trajectory& tr : trajectories) {
    std::vector<double> rho = autocorrelation(tr.values, burn, max_lag);
    for (size_t l = 0; l <= max_lag; ++l) pooled[l] += rho[l] / trajectories.size();
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int64_t cnt = 0;
  for (size_t l = 1; l <= max_lag; ++l) {
    if (pooled[l] < 0.05) break;
    if (pooled[l] > 0.8) continue;
    double x = static_cast<double>(l), y = std::log(pooled[l]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 3)
    throw HorizonTooShort("exponential fit: too few usable lags",
                          trajectories.front().horizon * 4.0);
  double denom = static_cast<double>(cnt) * sxx - sx * sx;
  double slope = (static_cast<double>(cnt) * sxy - sx * sy) / denom;
  if (!(slope < 0))
    throw HorizonTooShort("exponential fit: non-decaying autocorrelation",
                          trajectories.front().horizon * 4.0);
  TrelEstimate e;
  e.value = -dt / slope;
  e.stderr_ = e.value * 0.5 / std::sqrt(static_cast<double>(trajectories.size()));
  e.method = TrelMethod::ExponentialFit;
  e.replicas = static_cast<int>(trajectories.size());
  return e;
}

ScalingResult scaling_study(const ModelParams& params, const std::vector<int>& L_list,
                            int d, const ScalingOptions& opt) {
  if (L_list.size() < 3)
    throw std::invalid_argument("scaling_study: need at least 3 system sizes");

  ScalingResult result;
  for (size_t li = 0; li < L_list.size(); ++li) {
    const int L = L_list[li];
    Geometry geom(d, L);
    ObservableSpec obs = opt.observable;
    if (obs.kind == ObservableSpec::Kind::TestFunction)
      obs = ObservableSpec::test_function_default(params, L, d);

    // Pilot to set the sampling grid and horizon.
    double tau_guess = 0.08 * L * L + 1.0;
    for (int pass = 0; pass < 3; ++pass) {
      double horizon = std::max(30.0 * tau_guess, 50.0);
      double dt = std::max(tau_guess / 16.0, 1e-3);
      SimulateOptions so;
      so.horizon = horizon;
      so.sample_dt = dt;
      so.rule = opt.rule;
      so.seed = Rng::derive(opt.seed, 1000 * (li + 1) + pass);
      Trajectory tr = simulate(geom, params, obs, so);
      try {
        TrelOptions to = opt.trel;
        to.burn_in_multiple = 0.0;  // started from mu
        TrelEstimate e = estimate_trel({tr}, to);
        tau_guess = e.value;
      } catch (const HorizonTooShort&) {
        tau_guess *= 4.0;
      }
    }

    ScalingPoint pt;
    pt.L = L;
    for (int attempt = 0;; ++attempt) {
      double horizon = opt.target_tau_multiple * tau_guess;
      double dt = std::max(tau_guess / 16.0, 1e-3);
      std::vector<Trajectory> replicas(static_cast<size_t>(opt.replicas));
      parallel_for(opt.replicas, opt.threads, [&](int64_t r) {
        SimulateOptions so;
        so.horizon = horizon;
        so.sample_dt = dt;
        so.rule = opt.rule;
        so.seed = Rng::derive(opt.seed, 7919 * (li + 1) + 100 * attempt +
                                            static_cast<uint64_t>(r));
        replicas[static_cast<size_t>(r)] = simulate(geom, params, obs, so);
      });
      TrelOptions to = opt.trel;
      to.burn_in_multiple = 0.0;  // replicas start from mu
      try {
        pt.horizon = horizon;
        pt.trel = estimate_trel(replicas, to);
        // Keep the horizon-to-tau ratio uniform across sizes so the
        // truncation bias of the windowed estimator cancels in the fit.
        if (attempt < 3 && horizon < 0.8 * opt.target_tau_multiple * pt.trel.value) {
          tau_guess = pt.trel.value;
          continue;
        }
        break;
      } catch (const HorizonTooShort&) {
        if (attempt >= 3) throw;
        tau_guess *= 3.0;
      }
    }
    result.points.push_back(pt);
  }

  // Weighted least squares of log tau against log L.
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (const ScalingPoint& pt : result.points) {
    double x = std::log(static_cast<double>(pt.L));
    double y = std::log(pt.trel.value);
    double sigma = pt.trel.stderr_ > 0 ? pt.trel.stderr_ / pt.trel.value : 0.05;
    double w = 1.0 / (sigma * sigma);
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
  }
  double denom = sw * swxx - swx * swx;
  result.exponent = (sw * swxy - swx * swy) / denom;
  result.exponent_stderr = std::sqrt(sw / denom);
  return result;
}

}  // namespace ka
