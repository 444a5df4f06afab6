#include "mks/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "mks/errors.hpp"
#include "mks/summation.hpp"

namespace mks {

namespace {

double four_pi_pow(int dim) { return std::pow(4.0 * kPi, 0.5 * dim); }

void require_dim(int dim) {
  if (dim != 1 && dim != 2) throw Error(Errc::invalid_argument, "intrinsic dimension must be 1 or 2");
}

void require_density(double rho) {
  if (!(rho > 0.0)) throw Error(Errc::range_error, "density must be positive");
}

LimitVariance finish(StatisticKind kind, double sigma2, std::vector<std::pair<std::string, double>> parts) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error(Errc::degenerate_variance, std::string(statistic_name(kind)) + " limit variance is zero");
  return {kind, sigma2, std::move(parts)};
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

}  // namespace

std::string_view statistic_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::unnormalized: return "unnormalized";
    case StatisticKind::normalized: return "normalized";
    case StatisticKind::critical: return "critical";
    case StatisticKind::laplacian: return "laplacian";
    case StatisticKind::regression: return "regression";
  }
  return "?";
}

LimitVariance sigma_unnormalized(double rho, double fx, int dim) {
  require_dim(dim);
  require_density(rho);
  return finish(StatisticKind::unnormalized, rho * fx * fx / four_pi_pow(dim), {{"rho", rho}, {"f", fx}});
}

LimitVariance sigma_normalized(double rho, double grad_norm, int dim) {
  require_dim(dim);
  require_density(rho);
  return finish(StatisticKind::normalized, grad_norm * grad_norm / (2.0 * four_pi_pow(dim) * rho),
                {{"rho", rho}, {"grad_norm", grad_norm}});
}

LimitVariance sigma_critical(double rho, double hess_frob, double lap_abs, int dim) {
  require_dim(dim);
  require_density(rho);
  return finish(StatisticKind::critical,
                (2.0 * hess_frob * hess_frob + lap_abs * lap_abs) / (16.0 * four_pi_pow(dim) * rho),
                {{"rho", rho}, {"hess_frob", hess_frob}, {"laplacian_abs", lap_abs}});
}

LimitVariance sigma_regression(double rho, double var_y, int dim) {
  require_dim(dim);
  require_density(rho);
  return finish(StatisticKind::regression, var_y / (four_pi_pow(dim) * rho), {{"rho", rho}, {"var_y", var_y}});
}

LimitVariance sigma_laplacian(double rho, double grad_norm, int dim) {
  LimitVariance v = sigma_normalized(rho, grad_norm, dim);
  v.kind = StatisticKind::laplacian;
  v.sigma2 *= std::pow(2.0, 1.0 - 0.5 * dim);
  return v;
}

double statistic_scale(StatisticKind kind, double n, double eps, int dim) {
  require_dim(dim);
  if (!(n > 0.0) || !(eps > 0.0)) throw Error(Errc::range_error, "n and bandwidth must be positive");
  switch (kind) {
    case StatisticKind::unnormalized:
    case StatisticKind::regression: return std::sqrt(n * std::pow(eps, dim));
    case StatisticKind::normalized: return std::sqrt(n * std::pow(eps, dim - 2));
    case StatisticKind::critical: return std::sqrt(n * std::pow(eps, dim - 2)) / eps;
    case StatisticKind::laplacian: return std::sqrt(n * std::pow(eps, dim + 2));
  }
  return 0.0;
}

double standardize(StatisticKind kind, double estimate, double center, double n, double eps, int dim) {
  return statistic_scale(kind, n, eps, dim) * (estimate - center);
}

double ks_distance(std::span<const double> xs, double sigma2) {
  if (!(sigma2 > 0.0)) throw Error(Errc::degenerate_variance, "reference variance must be positive");
  if (xs.empty()) throw Error(Errc::empty_sample, "no replicates");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const double sd = std::sqrt(sigma2);
  const double b = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double phi = normal_cdf(v[i] / sd);
    d = std::max({d, static_cast<double>(i + 1) / b - phi, phi - static_cast<double>(i) / b});
  }
  return d;
}

double mahalanobis_ball_distance(const Matrix& xs, const Vector& sigma2) {
  if (xs.cols() != sigma2.size()) throw Error(Errc::invalid_argument, "dimension mismatch");
  if ((sigma2.array() <= 0.0).any()) throw Error(Errc::degenerate_variance, "reference variances must be positive");
  if (xs.rows() == 0) throw Error(Errc::empty_sample, "no replicates");
  std::vector<double> r2(static_cast<std::size_t>(xs.rows()));
  for (Eigen::Index i = 0; i < xs.rows(); ++i) r2[static_cast<std::size_t>(i)] = (xs.row(i).array().square() / sigma2.transpose().array()).sum();
  std::sort(r2.begin(), r2.end());
  const double half_m = 0.5 * static_cast<double>(xs.cols());
  const double b = static_cast<double>(r2.size());
  double d = 0.0;
  for (std::size_t i = 0; i < r2.size(); ++i) {
    const double cdf = boost::math::gamma_p(half_m, 0.5 * r2[i]);
    d = std::max({d, static_cast<double>(i + 1) / b - cdf, cdf - static_cast<double>(i) / b});
  }
  return d;
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(Errc::empty_sample, "no values");
  NeumaierSum acc;
  for (double x : xs) acc += x;
  return acc.value() / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(Errc::empty_sample, "variance needs two values");
  const double m = sample_mean(xs);
  NeumaierSum acc;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc.value() / static_cast<double>(xs.size() - 1);
}

std::vector<double> circle_test_critical_angles(double radius) {
  if (!(radius > 0.0)) throw Error(Errc::range_error, "radius must be positive");
  // d/dθ f(R cos θ, R sin θ); arclength derivative is this over R.
  auto deriv = [radius](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return -radius * s * std::exp(std::sin(radius * c)) * std::cos(radius * c) + radius * c;
  };
  constexpr int kScan = 20000;
  std::vector<double> roots;
  double a = 0.0, fa = deriv(0.0);
  for (int k = 1; k <= kScan; ++k) {
    const double b = kTwoPi * k / kScan;
    const double fb = deriv(b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if (fa * fb < 0.0) {
      boost::uintmax_t iters = 200;
      auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-13; };
      const auto [lo, hi] = boost::math::tools::toms748_solve(deriv, a, b, fa, fb, tol, iters);
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  for (double& r : roots) r = wrap_angle(r);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(), [](double x, double y) { return std::abs(x - y) < 1e-10; }),
              roots.end());
  return roots;
}

}  // namespace mks
