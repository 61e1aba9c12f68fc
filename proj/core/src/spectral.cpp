#include "ka/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ka/bootstrap.hpp"
#include "ka/errors.hpp"
#include "ka/rng.hpp"

namespace ka {

namespace {

Configuration config_from_mask(uint64_t mask, int64_t n_sites) {
  Configuration cfg(n_sites);
  for (int64_t s = 0; s < n_sites; ++s)
    if (mask & (uint64_t(1) << s)) cfg.set(s, true);
  return cfg;
}

}  // namespace

SpectralModel build_generator(const Geometry& geom, const ModelParams& params,
                              OutsideRule rule, int site_budget) {
  const int64_t n_sites = geom.size();
  if (n_sites > site_budget || n_sites > 30)
    throw BudgetExceeded("build_generator: |Lambda| exceeds the exact budget");
  SpectralModel model;
  model.d = geom.dim();
  model.L = geom.side();
  model.params = params;
  model.rule = rule;
  model.n_states = int64_t(1) << n_sites;

  const double p = 1.0 - params.q;
  model.weights.resize(static_cast<size_t>(model.n_states));
  model.row_ptr.assign(static_cast<size_t>(model.n_states) + 1, 0);

  for (int64_t st = 0; st < model.n_states; ++st) {
    Configuration cfg = config_from_mask(static_cast<uint64_t>(st), n_sites);
    model.weights[static_cast<size_t>(st)] = measure_weight(cfg, params);
    for (const Bond& b : geom.bonds()) {
      if (cfg.occupied(b.a) == cfg.occupied(b.b)) continue;
      if (constraint_satisfied(cfg, geom, b.a, b.b, params, rule)) {
        uint64_t next = uint64_t(st) ^ (uint64_t(1) << b.a) ^ (uint64_t(1) << b.b);
        model.target.push_back(static_cast<int32_t>(next));
        model.rate.push_back(1.0);
        ++model.row_ptr[static_cast<size_t>(st) + 1];
      }
    }
    for (int64_t x : geom.boundary_sites()) {
      double r = cfg.occupied(x) ? params.q : p;
      if (r > 0.0) {
        uint64_t next = uint64_t(st) ^ (uint64_t(1) << x);
        model.target.push_back(static_cast<int32_t>(next));
        model.rate.push_back(r);
        ++model.row_ptr[static_cast<size_t>(st) + 1];
      }
    }
  }
  for (size_t s = 0; s < static_cast<size_t>(model.n_states); ++s)
    model.row_ptr[s + 1] += model.row_ptr[s];
  return model;
}

namespace {

constexpr int64_t kDenseStateLimit = 4096;

// y = A x with A = D^{1/2} L D^{-1/2}, symmetric under detailed balance.
void apply_symmetrized(const SpectralModel& m, const std::vector<double>& x,
                       std::vector<double>& y) {
  const int64_t n = m.n_states;
  for (int64_t s = 0; s < n; ++s) {
    double acc = -m.out_rate(s) * x[static_cast<size_t>(s)];
    double ws = m.weights[static_cast<size_t>(s)];
    for (int64_t e = m.row_ptr[static_cast<size_t>(s)];
         e < m.row_ptr[static_cast<size_t>(s) + 1]; ++e) {
      int64_t t = m.target[static_cast<size_t>(e)];
      double a = m.rate[static_cast<size_t>(e)] *
                 std::sqrt(ws / m.weights[static_cast<size_t>(t)]);
      acc += a * x[static_cast<size_t>(t)];
    }
    y[static_cast<size_t>(s)] = acc;
  }
}

Eigen::MatrixXd dense_symmetrized(const SpectralModel& m) {
  const int64_t n = m.n_states;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int64_t s = 0; s < n; ++s) {
    A(s, s) = -m.out_rate(s);
    double ws = m.weights[static_cast<size_t>(s)];
    for (int64_t e = m.row_ptr[static_cast<size_t>(s)];
         e < m.row_ptr[static_cast<size_t>(s) + 1]; ++e) {
      int64_t t = m.target[static_cast<size_t>(e)];
      A(s, t) += m.rate[static_cast<size_t>(e)] *
                 std::sqrt(ws / m.weights[static_cast<size_t>(t)]);
    }
  }
  return A;
}

double lanczos_gap(const SpectralModel& m) {
  const int64_t n = m.n_states;
  // Ground state of the symmetrized operator is sqrt(mu).
  std::vector<double> psi0(static_cast<size_t>(n));
  for (int64_t s = 0; s < n; ++s)
    psi0[static_cast<size_t>(s)] = std::sqrt(m.weights[static_cast<size_t>(s)]);

  auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0;
    for (int64_t s = 0; s < n; ++s)
      acc += a[static_cast<size_t>(s)] * b[static_cast<size_t>(s)];
    return acc;
  };
  auto norm = [&](const std::vector<double>& a) { return std::sqrt(dot(a, a)); };

  const int max_iters = static_cast<int>(std::min<int64_t>(n - 1, 200));
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;

  Rng rng(12345);
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.uniform() - 0.5;
  // Project out psi0 and normalize.
  double c0 = dot(v, psi0) / dot(psi0, psi0);
  for (int64_t s = 0; s < n; ++s) v[static_cast<size_t>(s)] -= c0 * psi0[static_cast<size_t>(s)];
  double nv = norm(v);
  for (auto& x : v) x /= nv;

  std::vector<double> w(static_cast<size_t>(n));
  double prev_top = -1e300;
  for (int it = 0; it < max_iters; ++it) {
    basis.push_back(v);
    apply_symmetrized(m, v, w);
    double a = dot(w, v);
    alpha.push_back(a);
    // Full reorthogonalization against psi0 and the basis.
    double cp = dot(w, psi0) / dot(psi0, psi0);
    for (int64_t s = 0; s < n; ++s)
      w[static_cast<size_t>(s)] -= cp * psi0[static_cast<size_t>(s)];
    for (const auto& b : basis) {
      double cb = dot(w, b);
      for (int64_t s = 0; s < n; ++s)
        w[static_cast<size_t>(s)] -= cb * b[static_cast<size_t>(s)];
    }
    double nb = norm(w);
    // Tridiagonal eigenvalues: top Ritz value approximates -gap.
    if (it >= 2 && (it % 8 == 0 || nb < 1e-12 || it == max_iters - 1)) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(it + 1, it + 1);
      for (int r = 0; r <= it; ++r) {
        T(r, r) = alpha[static_cast<size_t>(r)];
        if (r > 0) {
          T(r, r - 1) = beta[static_cast<size_t>(r - 1)];
          T(r - 1, r) = beta[static_cast<size_t>(r - 1)];
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      double top = es.eigenvalues()(it);
      if (std::abs(top - prev_top) < 1e-11 * std::max(1.0, std::abs(top)) || nb < 1e-12)
        return -top;
      prev_top = top;
    }
    if (nb < 1e-12) break;
    beta.push_back(nb);
    for (int64_t s = 0; s < n; ++s) w[static_cast<size_t>(s)] /= nb;
    v = w;
  }
  return -prev_top;
}

}  // namespace

double exact_gap(const SpectralModel& model) {
  double gap;
  if (model.n_states <= kDenseStateLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_symmetrized(model));
    const auto& ev = es.eigenvalues();
    gap = -ev(model.n_states - 2);  // eigenvalues ascending; top is 0
  } else {
    gap = lanczos_gap(model);
  }
  if (!(gap > 1e-10))
    throw NumericalError("exact_gap: second eigenvalue degenerate with zero");
  return gap;
}

std::vector<double> exact_spectrum(const SpectralModel& model) {
  if (model.n_states > kDenseStateLimit)
    throw BudgetExceeded("exact_spectrum: dense path only");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_symmetrized(model));
  std::vector<double> out(static_cast<size_t>(model.n_states));
  for (int64_t s = 0; s < model.n_states; ++s) out[static_cast<size_t>(s)] = -es.eigenvalues()(s);
  std::sort(out.begin(), out.end());
  return out;
}

double ConfigFunction::delta_exchange(const Configuration& cfg, const Geometry& geom,
                                      int64_t x, int64_t y) const {
  Configuration swapped = apply_exchange(cfg, geom, x, y);
  return value(swapped) - value(cfg);
}

double ConfigFunction::delta_occupation(const Configuration& cfg, const Geometry& geom,
                                        int64_t x) const {
  (void)geom;
  Configuration c1 = cfg, c0 = cfg;
  c1.set(x, true);
  c0.set(x, false);
  return value(c1) - value(c0);
}

double dirichlet_form_exact(const SpectralModel& model, const Geometry& geom,
                            const ConfigFunction& f) {
  const int64_t n_sites = geom.size();
  const double pq = (1.0 - model.params.q) * model.params.q;
  double total = 0;
  for (int64_t st = 0; st < model.n_states; ++st) {
    Configuration cfg = config_from_mask(static_cast<uint64_t>(st), n_sites);
    double w = model.weights[static_cast<size_t>(st)];
    for (const Bond& b : geom.bonds()) {
      if (!constraint_satisfied(cfg, geom, b.a, b.b, model.params, model.rule)) continue;
      double d = f.delta_exchange(cfg, geom, b.a, b.b);
      total += w * d * d;
    }
    for (int64_t x : geom.boundary_sites()) {
      double d = f.delta_occupation(cfg, geom, x);
      total += w * pq * d * d;
    }
  }
  return total;
}

double variance_exact(const SpectralModel& model, const Geometry& geom,
                      const ConfigFunction& f) {
  const int64_t n_sites = geom.size();
  double mean = 0, second = 0;
  for (int64_t st = 0; st < model.n_states; ++st) {
    Configuration cfg = config_from_mask(static_cast<uint64_t>(st), n_sites);
    double w = model.weights[static_cast<size_t>(st)];
    double v = f.value(cfg);
    mean += w * v;
    second += w * v * v;
  }
  return second - mean * mean;
}

namespace {

Estimate batch_means(const std::vector<double>& batch_values) {
  MeanAccumulator acc;
  for (double v : batch_values) acc.add(v);
  return acc.estimate();
}

}  // namespace

Estimate dirichlet_form_mc(const Geometry& geom, const ModelParams& params,
                           OutsideRule rule, const ConfigFunction& f,
                           const McOptions& opt) {
  const auto& bonds = geom.bonds();
  const auto& bsites = geom.boundary_sites();
  const double pq = (1.0 - params.q) * params.q;
  const int64_t per_batch = std::max<int64_t>(1, opt.samples / opt.batches);
  Rng rng(opt.seed);
  std::vector<double> batches;
  for (int b = 0; b < opt.batches; ++b) {
    double acc = 0;
    for (int64_t s = 0; s < per_batch; ++s) {
      Configuration cfg = sample_configuration(geom, params, rng);
      // One bond and one boundary site, reweighted by the set sizes.
      const Bond& bd = bonds[rng.uniform_below(bonds.size())];
      if (constraint_satisfied(cfg, geom, bd.a, bd.b, params, rule)) {
        double d = f.delta_exchange(cfg, geom, bd.a, bd.b);
        acc += static_cast<double>(bonds.size()) * d * d;
      }
      if (!bsites.empty()) {
        int64_t x = bsites[rng.uniform_below(bsites.size())];
        double d = f.delta_occupation(cfg, geom, x);
        acc += static_cast<double>(bsites.size()) * pq * d * d;
      }
    }
    batches.push_back(acc / static_cast<double>(per_batch));
  }
  Estimate e = batch_means(batches);
  e.samples = per_batch * opt.batches;
  return e;
}

Estimate variance_mc(const Geometry& geom, const ModelParams& params,
                     const ConfigFunction& f, const McOptions& opt) {
  const int64_t per_batch = std::max<int64_t>(2, opt.samples / opt.batches);
  Rng rng(opt.seed);
  std::vector<double> batches;
  for (int b = 0; b < opt.batches; ++b) {
    MeanAccumulator acc;
    for (int64_t s = 0; s < per_batch; ++s) {
      Configuration cfg = sample_configuration(geom, params, rng);
      acc.add(f.value(cfg));
    }
    batches.push_back(acc.variance());
  }
  Estimate e = batch_means(batches);
  e.samples = per_batch * opt.batches;
  return e;
}

int64_t m_scale(double q, int k, int d, double c) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("m_scale: need 0 < q <= 1");
  if (k < 2 || k > d) throw std::invalid_argument("m_scale: need 2 <= k <= d");
  double value;
  if (k == 2) {
    value = c * std::pow(q, -1.0 / (d - 1));
  } else {
    value = c * std::pow(q, -1.0 / (d - k + 1));
    for (int i = 0; i < k - 2; ++i) {
      if (value > 700.0) throw NumericalError("m_scale: iterated exponential overflow");
      value = std::exp(value);
    }
  }
  if (!(value < 9.0e15)) throw NumericalError("m_scale: exceeds integer range");
  return static_cast<int64_t>(std::floor(value));
}

double bump_profile(const Coord& u_times_L, int L, int d) {
  double g = 1.0;
  for (int i = 0; i < d; ++i) {
    double u = static_cast<double>(u_times_L.x[i]) / L;
    double s = (u - 0.1) / 0.8;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    g *= std::exp(-1.0 / (s * (1.0 - s)));
  }
  return g;
}

TestFunction::TestFunction(const Geometry& geom, const ModelParams& params,
                           TestFunctionSpec spec)
    : geom_(&geom), params_(params), spec_(spec) {
  g_table_.resize(static_cast<size_t>(geom.size()));
  for (int64_t s = 0; s < geom.size(); ++s)
    g_table_[static_cast<size_t>(s)] = bump_profile(geom.coord(s), geom.side(), geom.dim());
}

double TestFunction::site_term(const Configuration& cfg, int64_t x) const {
  if (cfg.empty_at(x)) return 0.0;
  Coord r = effective_position(cfg, *geom_, geom_->coord(x), spec_.m, params_.k,
                               spec_.include_phantom_outside);
  return g_table_[static_cast<size_t>(geom_->index(r))];
}

double TestFunction::value(const Configuration& cfg) const {
  double f = 0;
  for (int64_t x = 0; x < geom_->size(); ++x) f += site_term(cfg, x);
  return f;
}

namespace {

// Sites whose local box contains x or y (all z with |z-a|_inf <= m for a in
// {x, y}).
void affected_sites(const Geometry& geom, int64_t x, int64_t y, int m,
                    std::vector<int64_t>& out) {
  out.clear();
  Coord cx = geom.coord(x);
  Coord cy = (y >= 0) ? geom.coord(y) : cx;
  const int d = geom.dim();
  Coord lo, hi;
  lo.d = hi.d = static_cast<int8_t>(d);
  for (int i = 0; i < d; ++i) {
    lo.x[i] = std::max(1, std::min(cx.x[i], cy.x[i]) - m);
    hi.x[i] = std::min(geom.side(), std::max(cx.x[i], cy.x[i]) + m);
  }
  Coord c = lo;
  while (true) {
    bool near = false;
    for (const Coord& a : {cx, cy}) {
      bool in = true;
      for (int i = 0; i < d; ++i)
        if (std::abs(c.x[i] - a.x[i]) > m) in = false;
      if (in) near = true;
    }
    if (near) out.push_back(geom.index(c));
    int i = d - 1;
    while (i >= 0 && c.x[i] == hi.x[i]) {
      c.x[i] = lo.x[i];
      --i;
    }
    if (i < 0) break;
    ++c.x[i];
  }
}

}  // namespace

double TestFunction::delta_exchange(const Configuration& cfg, const Geometry& geom,
                                    int64_t x, int64_t y) const {
  std::vector<int64_t> zs;
  affected_sites(geom, x, y, spec_.m, zs);
  double before = 0;
  for (int64_t z : zs) before += site_term(cfg, z);
  Configuration swapped = cfg;
  swapped.swap_sites(x, y);
  double after = 0;
  for (int64_t z : zs) after += site_term(swapped, z);
  return after - before;
}

double TestFunction::delta_occupation(const Configuration& cfg, const Geometry& geom,
                                      int64_t x) const {
  std::vector<int64_t> zs;
  affected_sites(geom, x, -1, spec_.m, zs);
  Configuration c1 = cfg, c0 = cfg;
  c1.set(x, true);
  c0.set(x, false);
  double v1 = 0, v0 = 0;
  for (int64_t z : zs) {
    v1 += site_term(c1, z);
    v0 += site_term(c0, z);
  }
  return v1 - v0;
}

double evaluate_test_function(const Configuration& cfg, const Geometry& geom,
                              const ModelParams& params, const TestFunctionSpec& spec) {
  TestFunction f(geom, params, spec);
  return f.value(cfg);
}

RayleighResult rayleigh_lower_bound(const Geometry& geom, const ModelParams& params,
                                    OutsideRule rule, const TestFunctionSpec& spec,
                                    const McOptions& opt, int site_budget) {
  RayleighResult res;
  TestFunction f(geom, params, spec);
  if (geom.size() <= site_budget) {
    res.mode = RayleighMode::Exact;
    SpectralModel model = build_generator(geom, params, rule, site_budget);
    res.variance = Estimate{variance_exact(model, geom, f), 0.0, model.n_states};
    res.dirichlet = Estimate{dirichlet_form_exact(model, geom, f), 0.0, model.n_states};
  } else {
    res.mode = RayleighMode::MonteCarlo;
    McOptions vo = opt;
    res.variance = variance_mc(geom, params, f, vo);
    McOptions dopt = opt;
    dopt.seed = Rng::derive(opt.seed, 777);
    res.dirichlet = dirichlet_form_mc(geom, params, rule, f, dopt);
  }
  double d = res.dirichlet.value, sd = res.dirichlet.stderr_;
  if (d - 2.0 * sd <= 0.0) {
    res.unbounded_below_confidence = true;
    return res;
  }
  double ratio = res.variance.value / d;
  double rel_v = res.variance.value > 0 ? res.variance.stderr_ / res.variance.value : 0.0;
  double rel_d = sd / d;
  Estimate r;
  r.value = ratio;
  r.stderr_ = ratio * std::sqrt(rel_v * rel_v + rel_d * rel_d);
  r.samples = res.variance.samples;
  res.ratio = r;
  return res;
}

}  // namespace ka
