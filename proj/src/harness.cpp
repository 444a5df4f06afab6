#include "mks/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "mks/asymptotics.hpp"
#include "mks/derivatives.hpp"
#include "mks/errors.hpp"
#include "mks/fields.hpp"
#include "mks/sampling.hpp"
#include "mks/smoothing.hpp"
#include "mks/spectral.hpp"

namespace mks {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kAdvisoryDelta = 0.05;
// Gradient norm below which a point counts as critical; critical angles are
// located to 1e-12.
constexpr double kCriticalGradTol = 1e-8;

struct EvalPoint {
  Vector theta;
  Vector x;
};

std::vector<EvalPoint> resolve_points(const ExperimentConfig& cfg, const Manifold& m) {
  std::vector<EvalPoint> out;
  for (const auto& spec : cfg.points) {
    Vector t = resolve_point(cfg, spec);
    out.push_back({t, m.chart_embed(t)});
  }
  return out;
}

// Deterministic chart points away from the usual sample angles: even spacing
// in θ₁, golden-ratio stride in θ₂.
std::vector<EvalPoint> chart_grid(const Manifold& m, int count, double offset) {
  std::vector<EvalPoint> out;
  for (int k = 0; k < count; ++k) {
    Vector t(m.intrinsic_dim());
    t(0) = kTwoPi * (k + offset) / count;
    if (m.intrinsic_dim() == 2) t(1) = kTwoPi * std::fmod((k + offset) * 0.6180339887498949, 1.0);
    out.push_back({t, m.chart_embed(t)});
  }
  return out;
}

std::vector<std::string> point_columns(const Manifold& m) {
  std::vector<std::string> c{"point"};
  for (int k = 0; k < m.intrinsic_dim(); ++k) c.push_back("theta" + std::to_string(k + 1));
  for (int k = 0; k < m.ambient_dim(); ++k) c.push_back("x" + std::to_string(k + 1));
  return c;
}

void push_point(std::vector<double>& row, std::size_t idx, const EvalPoint& p) {
  row.push_back(static_cast<double>(idx));
  for (Eigen::Index k = 0; k < p.theta.size(); ++k) row.push_back(p.theta(k));
  for (Eigen::Index k = 0; k < p.x.size(); ++k) row.push_back(p.x(k));
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index writes
// only its own output slot, so results do not depend on scheduling.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void bandwidth_advisory(std::vector<std::string>& adv, const Manifold& m, long n, double eps) {
  const double nn = static_cast<double>(n);
  const double star = std::pow(std::max(std::log(nn), std::log(1.0 / kAdvisoryDelta)) / nn, 1.0 / m.intrinsic_dim());
  char buf[200];
  if (eps <= star) {
    std::snprintf(buf, sizeof buf, "n=%ld: bandwidth %.6g is below (log n / n)^(1/d) = %.6g", n, eps, star);
    adv.emplace_back(buf);
  }
  if (eps >= m.injectivity_radius()) {
    std::snprintf(buf, sizeof buf, "n=%ld: bandwidth %.6g is not below the injectivity radius %.6g", n, eps,
                  m.injectivity_radius());
    adv.emplace_back(buf);
  }
}

double or_nan(const std::function<double()>& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_variance) return kNaN;
    throw;
  }
}

// ---------------------------------------------------------------------------
// Replicated standardized statistics (berry_*, laplacian, regression).

struct Series {
  std::string name;
  bool diagnostic = false;  // summarized by its max only
};

struct PointPlan {
  EvalPoint p;
  std::vector<double> sigma2;  // per series
  std::vector<double> center;  // per series, NaN for diagnostics
};

// values[point][series] for one replicate sample.
using ReplicateFn = std::function<std::vector<std::vector<double>>(const Sample&, std::uint64_t seed)>;

struct StatBlock {
  std::vector<Series> series;
  std::vector<PointPlan> plans;
  ReplicateFn replicate;
  std::vector<std::pair<std::string, double>> extra_summary;  // appended to every summary row
};

void init_stat_tables(ExperimentResult& res, const Manifold& m, const std::vector<Series>& series,
                      const std::vector<std::string>& extra) {
  res.raw.columns = point_columns(m);
  for (const char* c : {"n", "eps", "replicate"}) res.raw.columns.emplace_back(c);
  for (const auto& s : series) res.raw.columns.push_back(s.name);
  res.summary.columns = point_columns(m);
  for (const char* c : {"n", "eps"}) res.summary.columns.emplace_back(c);
  for (const auto& s : series) {
    if (s.diagnostic) {
      res.summary.columns.push_back(s.name + "_max");
      continue;
    }
    for (const char* suffix : {"_sigma2", "_center", "_mean", "_var", "_ks"}) res.summary.columns.push_back(s.name + suffix);
  }
  for (const auto& e : extra) res.summary.columns.push_back(e);
}

void run_stat_block(ExperimentResult& res, const ExperimentConfig& cfg, const Manifold& m, std::size_t n_idx,
                    long n, double eps, const StatBlock& blk, const RunOptions& opts) {
  const int B = cfg.replicates;
  std::vector<std::vector<std::vector<double>>> vals(static_cast<std::size_t>(B));
  parallel_for(B, opts.threads, [&](int b) {
    const std::uint64_t seed = derive_seed(cfg.seed, n_idx * static_cast<std::uint64_t>(B) + static_cast<std::uint64_t>(b));
    const Sample s = sample_density(m, cfg.density, n, seed);
    vals[static_cast<std::size_t>(b)] = blk.replicate(s, seed);
  });

  for (std::size_t pi = 0; pi < blk.plans.size(); ++pi) {
    const PointPlan& plan = blk.plans[pi];
    for (int b = 0; b < B; ++b) {
      std::vector<double> row;
      push_point(row, pi, plan.p);
      row.push_back(static_cast<double>(n));
      row.push_back(eps);
      row.push_back(b);
      for (double v : vals[static_cast<std::size_t>(b)][pi]) row.push_back(v);
      res.raw.rows.push_back(std::move(row));
    }
    std::vector<double> row;
    push_point(row, pi, plan.p);
    row.push_back(static_cast<double>(n));
    row.push_back(eps);
    for (std::size_t si = 0; si < blk.series.size(); ++si) {
      std::vector<double> xs;
      xs.reserve(static_cast<std::size_t>(B));
      for (int b = 0; b < B; ++b) xs.push_back(vals[static_cast<std::size_t>(b)][pi][si]);
      if (blk.series[si].diagnostic) {
        row.push_back(*std::max_element(xs.begin(), xs.end()));
        continue;
      }
      const double s2 = plan.sigma2[si];
      const double var = sample_variance(xs);
      row.push_back(s2);
      row.push_back(plan.center[si]);
      row.push_back(sample_mean(xs));
      row.push_back(var);
      row.push_back(std::isnan(s2) ? kNaN : ks_distance(xs, s2));
      const auto& name = blk.series[si].name;
      if (!std::isnan(s2) && name.find("_truth") == std::string::npos && (var < 0.5 * s2 || var > 2.0 * s2)) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "point %zu, n=%ld: %s empirical variance %.4g is outside [0.5, 2] x %.4g", pi, n,
                      name.c_str(), var, s2);
        res.advisories.emplace_back(buf);
      }
    }
    for (const auto& [_, v] : blk.extra_summary) row.push_back(v);
    res.summary.rows.push_back(std::move(row));
  }
}

std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

void run_berry(ExperimentResult& res, const ExperimentConfig& cfg, const RunOptions& opts) {
  const Manifold m = cfg.make_manifold();
  const int d = m.intrinsic_dim();
  const PopulationContext ctx(m, cfg.density, cfg.quadrature);
  const Density& rho = ctx.density();
  const ScalarField f = ScalarField::from_id(cfg.function);
  const auto points = resolve_points(cfg, m);

  std::vector<Series> series;
  for (const auto& s : cfg.statistics) {
    series.push_back({s});
    series.push_back({s + "_truth"});
  }
  init_stat_tables(res, m, series, {});

  for (std::size_t ni = 0; ni < cfg.n.size(); ++ni) {
    const long n = cfg.n[ni];
    const double eps = cfg.bandwidth.eps_for(static_cast<double>(n), d);
    const Bandwidth bw(eps, d);
    bandwidth_advisory(res.advisories, m, n, eps);
    if (opts.progress) opts.progress("n=" + std::to_string(n) + ": population centers");

    StatBlock blk;
    blk.series = series;
    for (const auto& p : points) {
      PointPlan plan{p, {}, {}};
      const double r = rho(p.x), fx = f(p.x);
      double t_pop = kNaN, tbar_pop = kNaN;
      for (const auto& s : cfg.statistics) {
        double s2 = kNaN, center = kNaN, truth = kNaN;
        if (s == "unnormalized") {
          if (std::isnan(t_pop)) t_pop = population_smooth(ctx, f, p.x, bw, false);
          s2 = or_nan([&] { return sigma_unnormalized(r, fx, d).sigma2; });
          center = t_pop;
          truth = r * fx;
        } else {
          if (std::isnan(tbar_pop)) tbar_pop = population_smooth(ctx, f, p.x, bw, true);
          center = tbar_pop;
          truth = fx;
          // Each limit applies on one side of the critical/regular split only;
          // the other side is reported as NaN.
          const double gn = manifold_gradient(m, f, p.x).norm();
          const bool critical = gn < kCriticalGradTol;
          if (s == "normalized") {
            if (!critical) s2 = or_nan([&] { return sigma_normalized(r, gn, d).sigma2; });
          } else if (critical) {
            const Matrix h = manifold_hessian(m, f, p.x);
            s2 = or_nan([&] { return sigma_critical(r, h.norm(), std::abs(h.trace()), d).sigma2; });
          }
        }
        plan.sigma2.insert(plan.sigma2.end(), {s2, s2});
        plan.center.insert(plan.center.end(), {center, truth});
      }
      blk.plans.push_back(std::move(plan));
    }

    std::vector<StatisticKind> kinds;
    for (const auto& s : cfg.statistics)
      kinds.push_back(s == "unnormalized" ? StatisticKind::unnormalized
                      : s == "normalized" ? StatisticKind::normalized
                                          : StatisticKind::critical);
    blk.replicate = [&, bw, n, eps](const Sample& s, std::uint64_t) {
      const std::vector<double> fv = f.on_sample(s);
      std::vector<std::vector<double>> out;
      for (const auto& plan : blk.plans) {
        std::vector<double> row;
        double t = kNaN, tbar = kNaN;
        for (std::size_t k = 0; k < kinds.size(); ++k) {
          double est;
          if (kinds[k] == StatisticKind::unnormalized) {
            if (std::isnan(t)) t = smooth_unnormalized(s, as_span(fv), plan.p.x, bw);
            est = t;
          } else {
            if (std::isnan(tbar)) tbar = smooth_normalized(s, as_span(fv), plan.p.x, bw);
            est = tbar;
          }
          const double nn = static_cast<double>(n);
          row.push_back(standardize(kinds[k], est, plan.center[2 * k], nn, eps, d));
          row.push_back(standardize(kinds[k], est, plan.center[2 * k + 1], nn, eps, d));
        }
        out.push_back(std::move(row));
      }
      return out;
    };
    if (opts.progress) opts.progress("n=" + std::to_string(n) + ": replicates");
    run_stat_block(res, cfg, m, ni, n, eps, blk, opts);
  }
}

double grid_max_error(const std::vector<EvalPoint>& grid, const std::function<double(const EvalPoint&)>& err) {
  double worst = 0.0;
  for (const auto& g : grid) worst = std::max(worst, std::abs(err(g)));
  return worst;
}

void run_laplacian(ExperimentResult& res, const ExperimentConfig& cfg, const RunOptions& opts) {
  const Manifold m = cfg.make_manifold();
  const int d = m.intrinsic_dim();
  const PopulationContext ctx(m, cfg.density, cfg.quadrature);
  const Density& rho = ctx.density();
  const ScalarField f = ScalarField::from_id(cfg.function);
  const auto points = resolve_points(cfg, m);
  const auto grid = chart_grid(m, cfg.grid_points, 0.0);
  const std::vector<Series> series{{"laplacian"}, {"laplacian_truth"}, {"identity_residual", true}};
  init_stat_tables(res, m, series, {"grid_max_error"});

  for (std::size_t ni = 0; ni < cfg.n.size(); ++ni) {
    const long n = cfg.n[ni];
    const double nn = static_cast<double>(n);
    const double eps = cfg.bandwidth.eps_for(nn, d);
    const Bandwidth bw(eps, d);
    const Bandwidth wide = bw.scaled(std::sqrt(2.0));
    bandwidth_advisory(res.advisories, m, n, eps);

    StatBlock blk;
    blk.series = series;
    std::vector<double> tbar_pop;
    for (const auto& p : points) {
      const double fx = f(p.x);
      const double tb = population_smooth(ctx, f, p.x, wide, true);
      tbar_pop.push_back(tb);
      const double gn = manifold_gradient(m, f, p.x).norm();
      const double s2 = gn < kCriticalGradTol ? kNaN : or_nan([&] { return sigma_laplacian(rho(p.x), gn, d).sigma2; });
      blk.plans.push_back({p, {s2, s2, kNaN}, {(fx - tb) / (eps * eps), weighted_laplacian(rho, f, p.x), kNaN}});
    }

    // Grid error on the first replicate's sample.
    {
      const Sample s0 = sample_density(m, cfg.density, n, derive_seed(cfg.seed, ni * static_cast<std::uint64_t>(cfg.replicates)));
      const auto fv = f.on_sample(s0);
      blk.extra_summary.push_back({"grid_max_error", grid_max_error(grid, [&](const EvalPoint& g) {
                                     return pointwise_laplacian(s0, as_span(fv), f(g.x), g.x, bw) -
                                            weighted_laplacian(rho, f, g.x);
                                   })});
    }

    blk.replicate = [&, bw, wide, nn, eps](const Sample& s, std::uint64_t) {
      const auto fv = f.on_sample(s);
      std::vector<std::vector<double>> out;
      for (std::size_t k = 0; k < blk.plans.size(); ++k) {
        const auto& plan = blk.plans[k];
        const double fx = f(plan.p.x);
        const double lap = pointwise_laplacian(s, as_span(fv), fx, plan.p.x, bw);
        const double tbn = smooth_normalized(s, as_span(fv), plan.p.x, wide);
        const double stat = standardize(StatisticKind::laplacian, lap, plan.center[0], nn, eps, d);
        const double smooth_stat = std::sqrt(nn * std::pow(eps, d - 2)) * (tbn - tbar_pop[k]);
        out.push_back({stat, standardize(StatisticKind::laplacian, lap, plan.center[1], nn, eps, d),
                       std::abs(smooth_stat + stat)});
      }
      return out;
    };
    if (opts.progress) opts.progress("n=" + std::to_string(n) + ": replicates");
    run_stat_block(res, cfg, m, ni, n, eps, blk, opts);
  }
}

void run_regression(ExperimentResult& res, const ExperimentConfig& cfg, const RunOptions& opts) {
  const Manifold m = cfg.make_manifold();
  const int d = m.intrinsic_dim();
  const PopulationContext ctx(m, cfg.density, cfg.quadrature);
  const Density& rho = ctx.density();
  const ScalarField g = ScalarField::from_id(cfg.function);
  const RegressionSpec spec{cfg.function, cfg.noise_sd, cfg.clip};
  const auto points = resolve_points(cfg, m);
  const auto grid = chart_grid(m, cfg.grid_points, 0.0);
  const std::vector<Series> series{{"regression"}, {"regression_truth"}};
  init_stat_tables(res, m, series, {"grid_max_error"});

  double gmax = 0.0;
  for (const auto& p : chart_grid(m, 256, 0.0)) gmax = std::max(gmax, std::abs(g(p.x)));
  if (cfg.clip < gmax + 6.0 * cfg.noise_sd)
    res.advisories.emplace_back("regression.clip is active: E[Y|X] and Var(Y|X) differ from g and noise_sd^2");

  for (std::size_t ni = 0; ni < cfg.n.size(); ++ni) {
    const long n = cfg.n[ni];
    const double nn = static_cast<double>(n);
    const double eps = cfg.bandwidth.eps_for(nn, d);
    const Bandwidth bw(eps, d);
    bandwidth_advisory(res.advisories, m, n, eps);

    StatBlock blk;
    blk.series = series;
    for (const auto& p : points) {
      const double s2 = or_nan([&] { return sigma_regression(rho(p.x), cfg.noise_sd * cfg.noise_sd, d).sigma2; });
      blk.plans.push_back({p, {s2, s2}, {population_smooth(ctx, g, p.x, bw, true), g(p.x)}});
    }
    {
      const std::uint64_t seed0 = derive_seed(cfg.seed, ni * static_cast<std::uint64_t>(cfg.replicates));
      const Sample s0 = attach_regression(sample_density(m, cfg.density, n, seed0), spec, derive_seed(seed0, 1));
      blk.extra_summary.push_back(
          {"grid_max_error", grid_max_error(grid, [&](const EvalPoint& q) { return nw_regress(s0, q.x, bw) - g(q.x); })});
    }
    blk.replicate = [&, bw, nn, eps](const Sample& s, std::uint64_t seed) {
      const Sample sy = attach_regression(s, spec, derive_seed(seed, 1));
      std::vector<std::vector<double>> out;
      for (const auto& plan : blk.plans) {
        const double est = nw_regress(sy, plan.p.x, bw);
        out.push_back({standardize(StatisticKind::regression, est, plan.center[0], nn, eps, d),
                       standardize(StatisticKind::regression, est, plan.center[1], nn, eps, d)});
      }
      return out;
    };
    if (opts.progress) opts.progress("n=" + std::to_string(n) + ": replicates");
    run_stat_block(res, cfg, m, ni, n, eps, blk, opts);
  }
}

// ---------------------------------------------------------------------------

void run_hks(ExperimentResult& res, const ExperimentConfig& cfg, const RunOptions& opts) {
  const Manifold m = cfg.make_manifold();
  const bool has_truth = m.kind() == ManifoldKind::circle && cfg.density.kind == DensityKind::uniform;
  std::vector<double> taus = cfg.tau;
  std::sort(taus.begin(), taus.end());
  const auto off = chart_grid(m, cfg.extend_points, 0.5);
  const int N = cfg.eigenpairs;

  res.raw.columns = {"n",           "replicate",       "tau",          "eigenpairs",         "eta",
                     "truth",       "hks_mean",        "hks_min",      "hks_max",            "mean_rel_error",
                     "extend_mean", "extend_max_rel_error", "monotone_tau", "monotone_count", "mu0",
                     "mu1",         "mu2",             "nu0_mean",    "nu0_rel_spread"};
  res.summary.columns = {"n",        "tau",           "eigenpairs",        "eta",          "truth",
                         "hks_mean", "mean_rel_error", "extend_max_rel_error", "monotone_tau", "monotone_count"};

  for (std::size_t ni = 0; ni < cfg.n.size(); ++ni) {
    const long n = cfg.n[ni];
    if (hks_sample_size_advisory(n, m.intrinsic_dim(), cfg.eta))
      res.advisories.push_back("n=" + std::to_string(n) + ": (log n / n)^(1/(4d+13)) exceeds eta");
    const int B = cfg.replicates;
    std::vector<std::vector<std::vector<double>>> rows(static_cast<std::size_t>(B));
    // Replicates run one at a time; each dense eigensolve is already the
    // dominant cost and memory footprint.
    for (int b = 0; b < B; ++b) {
      if (opts.progress) opts.progress("n=" + std::to_string(n) + ": replicate " + std::to_string(b));
      const std::uint64_t seed = derive_seed(cfg.seed, ni * static_cast<std::uint64_t>(B) + static_cast<std::uint64_t>(b));
      const Sample s = sample_density(m, cfg.density, n, seed);
      const GraphLaplacian L = build_reweighted_laplacian(s, cfg.eta);
      const SpectralDecomposition dec = w_normalize(eigendecompose(L, N), s, cfg.eta);
      const Vector nu0 = dec.vectors.col(0).cwiseAbs();
      const double spread = (nu0.maxCoeff() - nu0.minCoeff()) / nu0.mean();

      std::vector<Vector> per_tau;
      for (double tau : taus) per_tau.push_back(hks_at_samples(dec, tau, N));
      bool mono_tau = true;
      for (std::size_t k = 1; k < per_tau.size(); ++k)
        mono_tau = mono_tau && (per_tau[k].array() <= per_tau[k - 1].array()).all();

      for (std::size_t k = 0; k < taus.size(); ++k) {
        const Vector& h = per_tau[k];
        bool mono_count = true;
        Vector prev = hks_at_samples(dec, taus[k], 1);
        for (int c = 2; c <= N; ++c) {
          Vector cur = hks_at_samples(dec, taus[k], c);
          mono_count = mono_count && (cur.array() >= prev.array()).all();
          prev = std::move(cur);
        }
        const double truth = has_truth ? true_hks_circle(m.major_radius(), taus[k]) : kNaN;
        double ext_sum = 0.0, ext_err = 0.0;
        for (const auto& p : off) {
          const double e = hks_extend(s, h, p.x, cfg.extend_eps);
          ext_sum += e;
          if (has_truth) ext_err = std::max(ext_err, std::abs(e - truth) / truth);
        }
        const double mean = h.mean();
        rows[static_cast<std::size_t>(b)].push_back({static_cast<double>(n), static_cast<double>(b), taus[k],
                                                     static_cast<double>(N), cfg.eta, truth, mean, h.minCoeff(),
                                                     h.maxCoeff(), has_truth ? std::abs(mean - truth) / truth : kNaN,
                                                     ext_sum / static_cast<double>(off.size()),
                                                     has_truth ? ext_err : kNaN, mono_tau ? 1.0 : 0.0,
                                                     mono_count ? 1.0 : 0.0, dec.values(0),
                                                     N > 1 ? dec.values(1) : kNaN, N > 2 ? dec.values(2) : kNaN, nu0.mean(), spread});
      }
    }
    for (int b = 0; b < B; ++b)
      for (auto& r : rows[static_cast<std::size_t>(b)]) res.raw.rows.push_back(r);
    for (std::size_t k = 0; k < taus.size(); ++k) {
      std::vector<double> hm, re, ee;
      double mt = 1.0, mc = 1.0;
      for (int b = 0; b < B; ++b) {
        const auto& r = rows[static_cast<std::size_t>(b)][k];
        hm.push_back(r[6]);
        re.push_back(r[9]);
        ee.push_back(r[11]);
        mt = std::min(mt, r[12]);
        mc = std::min(mc, r[13]);
      }
      res.summary.rows.push_back({static_cast<double>(n), taus[k], static_cast<double>(N), cfg.eta,
                                  rows[0][k][5], sample_mean(hm), sample_mean(re),
                                  *std::max_element(ee.begin(), ee.end()), mt, mc});
    }
  }
}

// ---------------------------------------------------------------------------

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++k;
  }
  if (k < 2) return kNaN;
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

void run_rates(ExperimentResult& res, const ExperimentConfig& cfg, const RunOptions& opts) {
  const Manifold m = cfg.make_manifold();
  const int d = m.intrinsic_dim();
  const PopulationContext ctx(m, cfg.density, cfg.quadrature);
  const Density& rho = ctx.density();
  const bool uniform = rho.is_uniform();
  const ScalarField f = ScalarField::from_id(cfg.function);
  const auto points = resolve_points(cfg, m);
  const std::vector<std::string> metrics{"normalized_residual", "unnormalized_residual", "grad_error",
                                         "hess_error",          "grad_unnorm_error",     "hess_unnorm_error",
                                         "variance_integral_error"};
  res.raw.columns = point_columns(m);
  res.raw.columns.emplace_back("eps");
  for (const auto& k : metrics) res.raw.columns.push_back(k);
  res.summary.columns = {"eps"};
  for (const auto& k : metrics) res.summary.columns.push_back(k + "_sup");
  for (const auto& k : metrics) res.summary.columns.push_back(k + "_slope");

  std::vector<double> eps_list = cfg.eps;
  std::vector<std::vector<double>> sup(eps_list.size(), std::vector<double>(metrics.size(), 0.0));
  const double four_pi_d = std::pow(4.0 * kPi, 0.5 * d);

  for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
    const double eps = eps_list[ei];
    const Bandwidth bw(eps, d);
    if (opts.progress) opts.progress("eps=" + std::to_string(eps));
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const Vector& x = points[pi].x;
      const double fx = f(x), r = rho(x);
      const Vector grad = manifold_gradient(m, f, x);
      const Matrix hess = manifold_hessian(m, f, x);
      const double lap = laplace_beltrami(m, f, x);
      std::vector<double> v(metrics.size(), kNaN);
      v[0] = population_smooth(ctx, f, x, bw, true) - fx + 0.5 * eps * eps * weighted_laplacian(rho, f, x);
      if (uniform) {
        const double c = bias_curvature_coefficient(m.second_fundamental_form(x));
        v[1] = population_smooth(ctx, f, x, bw, false) - r * fx + 0.5 * eps * eps * (c * r * fx + r * lap);
      }
      v[2] = (population_grad(ctx, f, x, bw, true).coeffs - grad).norm();
      v[3] = (population_hess(ctx, f, x, bw, true).mat - hess).norm();
      if (uniform) {
        v[4] = (population_grad(ctx, f, x, bw, false).coeffs - r * grad).norm();
        v[5] = (population_hess(ctx, f, x, bw, false).mat - r * hess).norm();
      }
      v[6] = population_variance_integral(ctx, f, x, bw) - r * grad.squaredNorm() / (2.0 * four_pi_d);
      std::vector<double> row;
      push_point(row, pi, points[pi]);
      row.push_back(eps);
      for (std::size_t k = 0; k < v.size(); ++k) {
        row.push_back(v[k]);
        sup[ei][k] = std::isnan(v[k]) ? kNaN : std::max(sup[ei][k], std::abs(v[k]));
      }
      res.raw.rows.push_back(std::move(row));
    }
  }
  std::vector<double> slopes;
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    std::vector<double> y;
    for (std::size_t ei = 0; ei < eps_list.size(); ++ei) y.push_back(sup[ei][k]);
    slopes.push_back(loglog_slope(eps_list, y));
  }
  for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
    std::vector<double> row{eps_list[ei]};
    row.insert(row.end(), sup[ei].begin(), sup[ei].end());
    row.insert(row.end(), slopes.begin(), slopes.end());
    res.summary.rows.push_back(std::move(row));
  }
}

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error(Errc::schema_error, "no column '" + name + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = cfg;
  try {
    switch (cfg.kind) {
      case ExperimentKind::berry_circle:
      case ExperimentKind::berry_torus: run_berry(res, cfg, opts); break;
      case ExperimentKind::laplacian: run_laplacian(res, cfg, opts); break;
      case ExperimentKind::regression: run_regression(res, cfg, opts); break;
      case ExperimentKind::hks: run_hks(res, cfg, opts); break;
      case ExperimentKind::rates: run_rates(res, cfg, opts); break;
    }
  } catch (const std::exception& e) {
    res.failure = e.what();
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void write_table_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << g17(r[i]);
    os << '\n';
  }
}

Table read_table_csv(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::io_error, "empty CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell == "nan" ? kNaN : std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.columns.size()) throw Error(Errc::io_error, "CSV row width does not match its header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_results(const ExperimentResult& res, const std::string& dir) {
  auto open = [&](const std::string& name) {
    const std::string path = dir + "/" + name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
    return os;
  };
  {
    auto os = open("raw.csv");
    write_table_csv(os, res.raw);
    if (!os) throw Error(Errc::io_error, "write failed for '" + dir + "/raw.csv'");
  }
  {
    auto os = open("summary.csv");
    write_table_csv(os, res.summary);
    if (!os) throw Error(Errc::io_error, "write failed for '" + dir + "/summary.csv'");
  }
  nlohmann::json j;
  j["library_version"] = kLibraryVersion;
  j["experiment"] = std::string(experiment_name(res.config.kind));
  j["config_hash"] = config_hash(res.config);
  j["config"] = serialize_config(res.config);
  j["seed"] = res.config.seed;
  j["wall_seconds"] = res.wall_seconds;
  j["advisories"] = res.advisories;
  j["raw_rows"] = res.raw.rows.size();
  j["summary_rows"] = res.summary.rows.size();
  j["status"] = res.failure.empty() ? "ok" : "failed";
  if (!res.failure.empty()) j["failure"] = res.failure;
  auto os = open("result.json");
  os << j.dump(2) << '\n';
  if (!os) throw Error(Errc::io_error, "write failed for '" + dir + "/result.json'");
}

StoredResult read_results(const std::string& dir) {
  auto open = [&](const std::string& name) {
    const std::string path = dir + "/" + name;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(Errc::io_error, "cannot open '" + path + "'");
    return is;
  };
  StoredResult out;
  {
    auto is = open("raw.csv");
    out.raw = read_table_csv(is);
  }
  {
    auto is = open("summary.csv");
    out.summary = read_table_csv(is);
  }
  auto is = open("result.json");
  std::ostringstream ss;
  ss << is.rdbuf();
  out.sidecar = ss.str();
  return out;
}

}  // namespace mks
