#include "mks/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mks/errors.hpp"
#include "mks/summation.hpp"

namespace mks {

namespace {

constexpr double kDenominatorFloor = 1e-300;
constexpr double kDoublingTol = 1e-6;

void check_lengths(const Sample& s, std::span<const double> f) {
  if (static_cast<Eigen::Index>(f.size()) != s.size())
    throw Error(Errc::invalid_argument, "function values do not match the sample size");
}

void check_point(const Sample& s, const Vector& x) {
  if (x.size() != s.manifold().ambient_dim())
    throw Error(Errc::invalid_argument, "evaluation point has the wrong ambient dimension");
}

double sq_dist(const Sample& s, Eigen::Index i, const Vector& x) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double d = s.points()(i, k) - x(k);
    acc += d * d;
  }
  return acc;
}

// Shared by smooth_normalized and nw_regress.
double normalized_sum(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  check_lengths(s, f);
  check_point(s, x);
  const Eigen::Index n = s.size();
  std::vector<double> u2(static_cast<std::size_t>(n));
  Eigen::Index nearest = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    u2[static_cast<std::size_t>(i)] = sq_dist(s, i, x);
    if (u2[static_cast<std::size_t>(i)] < u2[static_cast<std::size_t>(nearest)]) nearest = i;
  }
  const double u2min = u2[static_cast<std::size_t>(nearest)];
  const double fref = f[static_cast<std::size_t>(nearest)];
  NeumaierSum num, den;
  double lo = fref, hi = fref;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double w = std::exp(-(u2[k] - u2min) * bw.inv_two_var());
    num += w * (f[k] - fref);
    den += w;
    lo = std::min(lo, f[k]);
    hi = std::max(hi, f[k]);
  }
  // log T[1] = log(norm) − u²_min/(2ε²) + log(Σw / n)
  const double log_t1 =
      std::log(bw.normalization()) - u2min * bw.inv_two_var() + std::log(den.value() / static_cast<double>(n));
  if (!(log_t1 >= std::log(kDenominatorFloor)))
    throw Error(Errc::degenerate_denominator, "kernel density at the evaluation point is below 1e-300");
  return std::clamp(fref + num.value() / den.value(), lo, hi);
}

}  // namespace

double smooth_unnormalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  check_lengths(s, f);
  check_point(s, x);
  NeumaierSum acc;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    acc += kernel_from_sq(sq_dist(s, i, x), bw) * f[static_cast<std::size_t>(i)];
  return acc.value() / static_cast<double>(s.size());
}

double smooth_normalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  return normalized_sum(s, f, x, bw);
}

double kde(const Sample& s, const Vector& x, const Bandwidth& bw) {
  check_point(s, x);
  NeumaierSum acc;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += kernel_from_sq(sq_dist(s, i, x), bw);
  return acc.value() / static_cast<double>(s.size());
}

double nw_regress(const Sample& s, const Vector& x, const Bandwidth& bw) {
  const Vector& y = s.responses();
  return normalized_sum(s, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), x, bw);
}

KernelMoments sample_moments(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  check_lengths(s, f);
  check_point(s, x);
  const int D = static_cast<int>(x.size());
  const double e2 = bw.eps() * bw.eps();
  const double e4 = e2 * e2;
  NeumaierSum val;
  std::vector<NeumaierSum> g(static_cast<std::size_t>(D)), h(static_cast<std::size_t>(D * D));
  Vector diff(D);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    for (int k = 0; k < D; ++k) diff(k) = s.points()(i, k) - x(k);
    const double kf = kernel_from_sq(diff.squaredNorm(), bw) * f[static_cast<std::size_t>(i)];
    val += kf;
    for (int a = 0; a < D; ++a) {
      g[static_cast<std::size_t>(a)] += kf * diff(a) / e2;
      for (int b = a; b < D; ++b)
        h[static_cast<std::size_t>(a * D + b)] += kf * (diff(a) * diff(b) / e4 - (a == b ? 1.0 / e2 : 0.0));
    }
  }
  const double inv_n = 1.0 / static_cast<double>(s.size());
  KernelMoments out{val.value() * inv_n, Vector(D), Matrix(D, D)};
  for (int a = 0; a < D; ++a) {
    out.grad(a) = g[static_cast<std::size_t>(a)].value() * inv_n;
    for (int b = a; b < D; ++b) out.hess(a, b) = out.hess(b, a) = h[static_cast<std::size_t>(a * D + b)].value() * inv_n;
  }
  return out;
}

PopulationContext::PopulationContext(Manifold m, DensitySpec spec, int base_resolution)
    : manifold_(m), density_(m, spec), base_(base_resolution) {
  if (base_ == 0) base_ = m.intrinsic_dim() == 1 ? 2048 : 512;
  if (base_ < 64) throw Error(Errc::range_error, "quadrature resolution must be at least 64 per axis");
}

int PopulationContext::resolution_for(double eps) const {
  const double longest = manifold_.kind() == ManifoldKind::circle ? manifold_.major_radius()
                                                                   : manifold_.major_radius() + manifold_.minor_radius();
  const double need = 2.0 * kTwoPi * longest / eps;
  int n = 64;
  while (n < base_ || n < need) {
    if (n > (1 << 24)) throw Error(Errc::resolution_too_coarse, "bandwidth too small for chart quadrature");
    n *= 2;
  }
  // Tensor grids beyond 2048² coarse nodes are out of reach.
  if (manifold_.intrinsic_dim() == 2 && n > 2048)
    throw Error(Errc::resolution_too_coarse, "torus bandwidth needs more than 2048 nodes per axis");
  return n;
}

const PopulationContext::Grid& PopulationContext::grid(int fine) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = grids_.find(fine);
  if (it != grids_.end()) return *it->second;
  auto g = std::make_shared<Grid>();
  const int d = manifold_.intrinsic_dim(), D = manifold_.ambient_dim();
  const double h = kTwoPi / fine;
  const Eigen::Index count = d == 1 ? fine : static_cast<Eigen::Index>(fine) * fine;
  g->points.resize(count, D);
  g->mass.resize(count);
  g->coarse.resize(static_cast<std::size_t>(count));
  Vector theta(d);
  for (Eigen::Index k = 0; k < count; ++k) {
    const int i = static_cast<int>(d == 1 ? k : k / fine);
    const int j = static_cast<int>(d == 1 ? 0 : k % fine);
    if (d == 1)
      theta << i * h;
    else
      theta << i * h, j * h;
    g->points.row(k) = manifold_.chart_embed(theta).transpose();
    g->mass(k) = std::pow(h, d) * density_.chart_density(theta);
    g->coarse[static_cast<std::size_t>(k)] = (i % 2 == 0 && j % 2 == 0);
  }
  auto [pos, _] = grids_.emplace(fine, std::move(g));
  return *pos->second;
}

Vector PopulationContext::integrate(double eps, int width, const Integrand& g) const {
  const int coarse_n = resolution_for(eps);
  const Grid& grid_ = grid(2 * coarse_n);
  const double coarse_scale = std::pow(2.0, manifold_.intrinsic_dim());
  const auto w = static_cast<std::size_t>(width);
  std::vector<NeumaierSum> fine(w), coarse(w), mass(w);
  std::vector<double> vals(w);
  Vector u(manifold_.ambient_dim());
  for (Eigen::Index k = 0; k < grid_.points.rows(); ++k) {
    u = grid_.points.row(k).transpose();
    std::fill(vals.begin(), vals.end(), 0.0);
    g(u, vals.data());
    const double m = grid_.mass(k);
    const bool on_coarse = grid_.coarse[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < w; ++c) {
      fine[c] += m * vals[c];
      mass[c] += m * std::abs(vals[c]);
      if (on_coarse) coarse[c] += coarse_scale * m * vals[c];
    }
  }
  Vector out(width);
  for (std::size_t c = 0; c < w; ++c) {
    const double a = fine[c].value(), b = coarse[c].value();
    if (std::abs(a - b) > kDoublingTol * mass[c].value())
      throw Error(Errc::resolution_too_coarse, "quadrature changed under resolution doubling");
    out(static_cast<Eigen::Index>(c)) = a;
  }
  return out;
}

double population_smooth(const PopulationContext& ctx, const ScalarField& f, const Vector& x, const Bandwidth& bw,
                         bool normalized) {
  ctx.manifold().require_on_manifold(x);
  if (!normalized) {
    return ctx.integrate(bw.eps(), 1, [&](const Vector& u, double* out) {
      out[0] = kernel_from_sq((u - x).squaredNorm(), bw) * f(u);
    })(0);
  }
  const double fx = f(x);
  const Vector r = ctx.integrate(bw.eps(), 2, [&](const Vector& u, double* out) {
    const double k = kernel_from_sq((u - x).squaredNorm(), bw);
    out[0] = k * (f(u) - fx);
    out[1] = k;
  });
  if (!(r(1) >= kDenominatorFloor))
    throw Error(Errc::degenerate_denominator, "population kernel density below 1e-300");
  return fx + r(0) / r(1);
}

double population_variance_integral(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                                    const Bandwidth& bw) {
  ctx.manifold().require_on_manifold(x);
  const int d = bw.dim();
  const double eps = bw.eps();
  const double unit_norm = std::pow(kTwoPi, -0.5 * d);
  const double fx = f(x);
  return ctx.integrate(eps, 1, [&](const Vector& u, double* out) {
    const double k = unit_norm * std::exp(-(u - x).squaredNorm() * bw.inv_two_var());
    const double inc = (f(u) - fx) / eps;
    out[0] = k * k * inc * inc;
  })(0) / std::pow(eps, d);
}

PopulationMoments population_moments(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                                     const Bandwidth& bw, double shift) {
  ctx.manifold().require_on_manifold(x);
  const int D = static_cast<int>(x.size());
  const int block = 1 + D + D * D;
  const double e2 = bw.eps() * bw.eps();
  const double e4 = e2 * e2;
  const Vector r = ctx.integrate(bw.eps(), 2 * block, [&](const Vector& u, double* out) {
    const Vector diff = u - x;
    const double k = kernel_from_sq(diff.squaredNorm(), bw);
    const double fu = f(u) - shift;
    out[0] = k * fu;
    out[block] = k;
    for (int a = 0; a < D; ++a) {
      out[1 + a] = k * fu * diff(a) / e2;
      out[block + 1 + a] = k * diff(a) / e2;
      for (int b = 0; b < D; ++b) {
        const double z = diff(a) * diff(b) / e4 - (a == b ? 1.0 / e2 : 0.0);
        out[1 + D + a * D + b] = k * fu * z;
        out[block + 1 + D + a * D + b] = k * z;
      }
    }
  });
  auto unpack = [&](int off) {
    KernelMoments m{r(off), Vector(D), Matrix(D, D)};
    for (int a = 0; a < D; ++a) {
      m.grad(a) = r(off + 1 + a);
      for (int b = 0; b < D; ++b) m.hess(a, b) = r(off + 1 + D + a * D + b);
    }
    m.hess = 0.5 * (m.hess + m.hess.transpose()).eval();
    return m;
  };
  return {unpack(0), unpack(block)};
}

}  // namespace mks
