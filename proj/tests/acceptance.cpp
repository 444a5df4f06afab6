// Acceptance suite: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the listed numbers. Exit status 1 if any
// selected criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mks/asymptotics.hpp"
#include "mks/derivatives.hpp"
#include "mks/harness.hpp"
#include "mks/kernels.hpp"
#include "mks/smoothing.hpp"
#include "oracles.hpp"

using namespace mks;

namespace {

// Tolerances, pinned.
constexpr double kMomentTol = 1e-6;
constexpr double kGeomTol = 1e-9;
constexpr double kBiasSlope = 2.5;
constexpr double kKsCircle = 0.15;
constexpr double kKsTorus = 0.20;
constexpr double kLapGridTol = 0.1;
constexpr double kIdentityTol = 1e-12;
constexpr double kHksRelTol = 0.15;
constexpr double kRegGridTol = 0.1;
constexpr double kKsRegression = 0.15;
constexpr double kFdRelTol = 1e-6;
constexpr double kDerivSlope = 1.7;
constexpr double kCriticalVarRatio = 0.2;
constexpr double kCriticalSigmaFactor = 2.0;
constexpr int kRootSeeds = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ExperimentConfig load(const std::string& name) {
  std::ifstream in(std::string(MKS_CONFIG_DIR) + "/" + name + ".ini");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunOptions run_opts() {
  RunOptions o;
  o.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return o;
}

std::string csv_of(const Table& t) {
  std::ostringstream os;
  write_table_csv(os, t);
  return os.str();
}

// First-run CSV bytes keyed by config name, reused by the determinism check.
std::map<std::string, std::pair<std::string, std::string>> g_first_run;

ExperimentResult run_named(const std::string& name, const ExperimentConfig& cfg) {
  ExperimentResult r = run_experiment(cfg, run_opts());
  if (!r.failure.empty()) throw std::runtime_error(name + ": " + r.failure);
  if (!g_first_run.count(name)) g_first_run[name] = {csv_of(r.raw), csv_of(r.summary)};
  return r;
}

ExperimentResult run_named(const std::string& name) { return run_named(name, load(name)); }

// ---------------------------------------------------------------------------

Outcome kernel_identities() {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int d = 1; d <= 2; ++d) {
    const auto rule = oracle::gauss_legendre(d == 1 ? 160 : 90, -10, 10);
    auto integrate = [&](const std::function<double(const Eigen::VectorXd&)>& g) {
      if (d == 1) return oracle::integrate_1d(rule, [&](double a) { return g(Eigen::VectorXd::Constant(1, a)); });
      return oracle::integrate_2d(rule, [&](double a, double b) {
        Eigen::VectorXd z(2);
        z << a, b;
        return g(z);
      });
    };
    for (int k = 0; k < 5; ++k) {
      Matrix a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) a(i, j) = a(j, i) = nd(gen);
      auto K = [&](const Eigen::VectorXd& z) { return oracle::unit_kernel(z.squaredNorm(), d); };
      auto q = [&](const Eigen::VectorXd& z) { return z.dot(a * z); };
      auto rel = [&](double got, double ref) { worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref))); };
      rel(std::get<double>(kernel_moment(Moment::quadratic, d, a)), integrate([&](auto& z) { return K(z) * q(z); }));
      rel(std::get<double>(kernel_moment(Moment::quadratic_sq, d, a)),
          integrate([&](auto& z) { return K(z) * q(z) * q(z); }));
      rel(std::get<double>(kernel_moment(Moment::kernel_sq, d)), integrate([&](auto& z) { return K(z) * K(z); }));
      rel(std::get<double>(kernel_moment(Moment::kernel_sq_quad, d, a)),
          integrate([&](auto& z) { return K(z) * K(z) * q(z); }));
      rel(std::get<double>(kernel_moment(Moment::kernel_sq_quad_sq, d, a)),
          integrate([&](auto& z) { return K(z) * K(z) * q(z) * q(z); }));
      const Matrix co = std::get<Matrix>(kernel_moment(Moment::centered_outer, d, a));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          rel(co(i, j), integrate([&](auto& z) { return K(z) * (z(i) * z(j) - (i == j)) * q(z); }));
    }
  }
  return {worst <= kMomentTol, "max rel error " + fmt("%.2e", worst)};
}

Outcome geometry_oracles() {
  double frame = 0, normal = 0, chord = 0;
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (const Manifold& m : {Manifold::circle(5.0), Manifold::torus(0.5, 1.0 / 3.0)}) {
    const int d = m.intrinsic_dim();
    for (int k = 0; k < 1000; ++k) {
      Vector t(d);
      for (int i = 0; i < d; ++i) t(i) = kTwoPi * u(gen);
      const Vector x = m.chart_embed(t);
      const Matrix J = m.tangent_frame(x);
      frame = std::max(frame, (J.transpose() * J - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
      const auto b = m.second_fundamental_form(x);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) normal = std::max(normal, (J.transpose() * b.at(i, j)).cwiseAbs().maxCoeff());
      Vector z(d);
      for (int i = 0; i < d; ++i) z(i) = u(gen) - 0.5;
      z *= 0.9 * u(gen) * std::min(1.0, m.injectivity_radius()) / z.norm();
      const double c = (m.exp_map(x, z) - x).norm(), zn = z.norm();
      chord = std::max({chord, c - zn, 0.5 * zn - c});
    }
  }
  const bool ok = frame <= kGeomTol && normal <= kGeomTol && chord <= kGeomTol;
  return {ok, "frame " + fmt("%.1e", frame) + ", normality " + fmt("%.1e", normal) + ", chord bound excess " +
                  fmt("%.1e", std::max(chord, 0.0))};
}

Outcome bias_expansion() {
  const ExperimentResult r = run_named("rates");
  const double sn = r.summary.at(0, "normalized_residual_slope");
  const double su = r.summary.at(0, "unnormalized_residual_slope");
  return {sn >= kBiasSlope && su >= kBiasSlope,
          "slopes normalized " + fmt("%.3f", sn) + ", unnormalized " + fmt("%.3f", su)};
}

std::vector<double> ks_column(const ExperimentResult& r, const std::string& col, double n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < r.summary.rows.size(); ++i)
    if (r.summary.at(i, "n") == n) out.push_back(r.summary.at(i, col));
  return out;
}

Outcome circle_unnormalized() {
  const ExperimentConfig base = load("berry_circle");
  std::vector<std::vector<double>> big(2), small(2);  // per point, over seeds
  double worst = 0;
  for (int s = 0; s < kRootSeeds; ++s) {
    ExperimentConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(s);
    const ExperimentResult r = run_named(s == 0 ? "berry_circle" : "berry_circle#" + std::to_string(s), cfg);
    const auto b = ks_column(r, "unnormalized_truth_ks", 10000), a = ks_column(r, "unnormalized_truth_ks", 500);
    for (std::size_t p = 0; p < 2; ++p) {
      big[p].push_back(b[p]);
      small[p].push_back(a[p]);
      worst = std::max(worst, b[p]);
    }
  }
  bool ok = worst <= kKsCircle;
  std::string detail = "max KS at n=1e4 " + fmt("%.4f", worst);
  for (std::size_t p = 0; p < 2; ++p) {
    const double mb = median(big[p]), ms = median(small[p]);
    ok = ok && mb < ms;
    detail += "; point " + std::to_string(p) + " median KS " + fmt("%.4f", ms) + " (n=500) -> " + fmt("%.4f", mb);
  }
  return {ok, detail};
}

Outcome circle_normalized() {
  const ExperimentResult r = run_named("berry_circle#normalized", [] {
    ExperimentConfig c = load("berry_circle");
    c.statistics = {"normalized"};
    return c;
  }());
  const auto ks = ks_column(r, "normalized_truth_ks", 10000);
  const double worst = *std::max_element(ks.begin(), ks.end());
  return {worst <= kKsCircle, "KS at n=1e4: " + fmt("%.4f", ks[0]) + ", " + fmt("%.4f", ks[1])};
}

Outcome torus_ks() {
  const ExperimentConfig base = load("berry_torus");
  ExperimentConfig cfg = base;
  cfg.statistics = {"unnormalized", "normalized"};
  const ExperimentResult r = run_named("berry_torus", cfg);
  double worst = 0;
  std::string detail;
  for (const char* col : {"unnormalized_ks", "normalized_ks"}) {
    const auto ks = ks_column(r, col, 10000);
    for (double v : ks) worst = std::max(worst, v);
    detail += std::string(col) + " " + fmt("%.4f", ks[0]) + "/" + fmt("%.4f", ks[1]) + "; ";
  }
  return {worst <= kKsTorus, detail + "max " + fmt("%.4f", worst)};
}

Outcome laplacian() {
  const ExperimentResult r = run_named("laplacian");
  double grid = 0, ident = 0;
  for (std::size_t i = 0; i < r.summary.rows.size(); ++i) {
    grid = std::max(grid, r.summary.at(i, "grid_max_error"));
    ident = std::max(ident, r.summary.at(i, "identity_residual_max"));
  }
  return {grid <= kLapGridTol && ident <= kIdentityTol,
          "grid max error " + fmt("%.4f", grid) + " (bound " + fmt("%.2f", kLapGridTol) + "), identity residual " +
              fmt("%.1e", ident)};
}

Outcome hks() {
  const ExperimentResult r = run_named("hks");
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < r.summary.rows.size(); ++i) {
    const double me = r.summary.at(i, "mean_rel_error"), ee = r.summary.at(i, "extend_max_rel_error");
    const bool mono = r.summary.at(i, "monotone_tau") == 1.0 && r.summary.at(i, "monotone_count") == 1.0;
    ok = ok && me <= kHksRelTol && ee <= kHksRelTol && mono;
    detail += "tau " + fmt("%g", r.summary.at(i, "tau")) + ": mean " + fmt("%.4f", me) + ", extension " +
              fmt("%.4f", ee) + (mono ? ", monotone; " : ", NOT monotone; ");
  }
  return {ok, detail};
}

Outcome regression() {
  const ExperimentConfig cfg = load("regression");
  const Manifold m = cfg.make_manifold();
  const Sample s = attach_regression(sample_density(m, cfg.density, 5000, cfg.seed),
                                     {cfg.function, cfg.noise_sd, cfg.clip}, derive_seed(cfg.seed, 1));
  const ScalarField g = ScalarField::from_id(cfg.function);
  double grid = 0;
  for (int k = 0; k < 64; ++k) {
    Vector t(1);
    t << kTwoPi * k / 64;
    const Vector x = m.chart_embed(t);
    grid = std::max(grid, std::abs(nw_regress(s, x, Bandwidth(0.05, 1)) - g(x)));
  }
  const ExperimentResult r = run_named("regression");
  const double ks = r.summary.at(0, "regression_ks");
  return {grid <= kRegGridTol && ks <= kKsRegression,
          "grid error " + fmt("%.4f", grid) + " (n=5000), KS " + fmt("%.4f", ks) + " (n=1e4)"};
}

Outcome derivatives() {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  int configs = 0;
  for (int torus = 0; torus < 2; ++torus) {
    const Manifold m = torus ? Manifold::torus(0.5, 1.0 / 3.0) : Manifold::circle(5.0);
    const ScalarField f = torus ? ScalarField::torus_test() : ScalarField::circle_test();
    for (int k = 0; k < 10; ++k, ++configs) {
      const Sample s = sample_uniform(m, 80, 500 + static_cast<std::uint64_t>(k));
      const auto fv = f.on_sample(s);
      const Vector x = s.point(static_cast<Eigen::Index>(u(gen) * 80));
      const Bandwidth bw((torus ? 0.2 : 1.0) + 0.5 * u(gen), m.intrinsic_dim());
      auto T = [&](const Eigen::VectorXd& y) { return smooth_unnormalized(s, fv, y, bw); };
      const Vector g = ambient_grad_T(s, fv, x, bw);
      const Matrix H = ambient_hess_T(s, fv, x, bw);
      for (int a = 0; a < x.size(); ++a) {
        worst = std::max(worst, std::abs(g(a) - oracle::central_diff(T, x, a, 1e-5 * bw.eps())) / (g.norm() + 1e-12));
        for (int b = 0; b < x.size(); ++b)
          worst = std::max(worst,
                           std::abs(H(a, b) - oracle::central_diff2(T, x, a, b, 1e-3 * bw.eps())) / (H.norm() + 1e-12));
      }
    }
  }
  const ExperimentResult r = run_named("rates");
  double slope = 1e300;
  for (const char* c : {"grad_error_slope", "hess_error_slope", "grad_unnorm_error_slope", "hess_unnorm_error_slope"})
    slope = std::min(slope, r.summary.at(0, c));
  return {worst <= kFdRelTol && configs == 20 && slope >= kDerivSlope,
          std::to_string(configs) + " configs, max FD rel error " + fmt("%.2e", worst) + ", min population slope " +
              fmt("%.3f", slope)};
}

Outcome critical() {
  const ExperimentConfig base = load("critical");
  std::vector<double> ratio, scaled;
  for (int s = 0; s < kRootSeeds; ++s) {
    ExperimentConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(s);
    const ExperimentResult r = run_named(s == 0 ? "critical" : "critical#" + std::to_string(s), cfg);
    // row 0 is the critical point, row 1 the regular point (5, 0)
    ratio.push_back(r.summary.at(0, "normalized_var") / r.summary.at(1, "normalized_var"));
    scaled.push_back(r.summary.at(0, "critical_var") / r.summary.at(0, "critical_sigma2"));
  }
  const double mr = median(ratio), ms = median(scaled);
  const bool ok = mr <= kCriticalVarRatio && ms >= 1.0 / kCriticalSigmaFactor && ms <= kCriticalSigmaFactor;
  std::string per;
  for (double v : scaled) per += fmt(" %.3f", v);
  return {ok, "median variance ratio " + fmt("%.2e", mr) + ", median var/sigma_critical " + fmt("%.3f", ms) +
                  " (per seed" + per + ")"};
}

Outcome determinism() {
  // Every shipped config is rerun; the first run comes from earlier criteria
  // when they ran in this process.
  const std::vector<std::string> names{"berry_circle", "berry_torus", "critical", "rates",
                                       "laplacian",    "hks",         "regression"};
  bool ok = true;
  std::string detail;
  for (const auto& name : names) {
    ExperimentConfig cfg = load(name);
    if (name == "berry_torus") cfg.statistics = {"unnormalized", "normalized"};
    if (!g_first_run.count(name)) run_named(name, cfg);
    const ExperimentResult again = run_experiment(cfg, run_opts());
    const bool same = again.failure.empty() && csv_of(again.raw) == g_first_run[name].first &&
                      csv_of(again.summary) == g_first_run[name].second;
    ok = ok && same;
    if (!same) detail += name + " differs; ";
  }
  return {ok, ok ? "7 configs byte-identical on rerun" : detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kernel moment identities", kernel_identities},
      {"geometry oracles", geometry_oracles},
      {"bias expansion rates", bias_expansion},
      {"circle unnormalized KS", circle_unnormalized},
      {"circle normalized KS", circle_normalized},
      {"torus KS", torus_ks},
      {"graph Laplacian", laplacian},
      {"heat kernel signature", hks},
      {"regression", regression},
      {"derivative estimators", derivatives},
      {"critical-point regime", critical},
      {"determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failed = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::printf("criterion %d: unknown\n", k);
      ++failed;
      continue;
    }
    const auto& [name, fn] = criteria[static_cast<std::size_t>(k - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-26s %s  %s  [%.1f s]\n", k, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
