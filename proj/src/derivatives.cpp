#include "mks/derivatives.hpp"

#include <vector>

#include "mks/errors.hpp"

namespace mks {

namespace {

void check_denominator(double q) {
  if (!(q >= 1e-300)) throw Error(Errc::degenerate_denominator, "kernel density below 1e-300");
}

double nearest_value(const Sample& s, std::span<const double> f, const Vector& x) {
  Eigen::Index best = 0;
  double best_d = (s.point(0) - x).squaredNorm();
  for (Eigen::Index i = 1; i < s.size(); ++i) {
    const double d = (s.points().row(i).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return f[static_cast<std::size_t>(best)];
}

std::pair<KernelMoments, KernelMoments> shifted_moments(const Sample& s, std::span<const double> f, const Vector& x,
                                                        const Bandwidth& bw) {
  if (static_cast<Eigen::Index>(f.size()) != s.size())
    throw Error(Errc::invalid_argument, "function values do not match the sample size");
  const double ref = nearest_value(s, f, x);
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] - ref;
  const std::vector<double> ones(f.size(), 1.0);
  return {sample_moments(s, g, x, bw), sample_moments(s, ones, x, bw)};
}

}  // namespace

Vector ambient_grad_T(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  return sample_moments(s, f, x, bw).grad;
}

Matrix ambient_hess_T(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  return sample_moments(s, f, x, bw).hess;
}

TangentGradient tangent_grad_of(const Manifold& m, const Vector& x, const KernelMoments& p) {
  return {tangent_gradient(m.tangent_frame(x), p.grad)};
}

TangentHessian tangent_hess_of(const Manifold& m, const Vector& x, const KernelMoments& p) {
  return {tangent_hessian(m.tangent_frame(x), m.second_fundamental_form(x), p.grad, p.hess)};
}

TangentGradient quotient_grad(const Manifold& m, const Vector& x, const KernelMoments& p, const KernelMoments& q) {
  check_denominator(q.value);
  const Matrix J = m.tangent_frame(x);
  const Vector gp = tangent_gradient(J, p.grad), gq = tangent_gradient(J, q.grad);
  return {(gp - (p.value / q.value) * gq) / q.value};
}

TangentHessian quotient_hess(const Manifold& m, const Vector& x, const KernelMoments& p, const KernelMoments& q) {
  check_denominator(q.value);
  const Matrix J = m.tangent_frame(x);
  const SecondFundamentalForm sff = m.second_fundamental_form(x);
  const Vector gp = tangent_gradient(J, p.grad), gq = tangent_gradient(J, q.grad);
  const Matrix hp = tangent_hessian(J, sff, p.grad, p.hess), hq = tangent_hessian(J, sff, q.grad, q.hess);
  const double a = p.value, b = q.value;
  Matrix h = hp / b - (gp * gq.transpose() + gq * gp.transpose()) / (b * b) - a * hq / (b * b) +
             2.0 * a * gq * gq.transpose() / (b * b * b);
  h = 0.5 * (h + h.transpose()).eval();
  return {h};
}

TangentGradient grad_unnormalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  s.manifold().require_on_manifold(x);
  return tangent_grad_of(s.manifold(), x, sample_moments(s, f, x, bw));
}

TangentHessian hess_unnormalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  s.manifold().require_on_manifold(x);
  return tangent_hess_of(s.manifold(), x, sample_moments(s, f, x, bw));
}

TangentGradient grad_normalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  s.manifold().require_on_manifold(x);
  const auto [p, q] = shifted_moments(s, f, x, bw);
  return quotient_grad(s.manifold(), x, p, q);
}

TangentHessian hess_normalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw) {
  s.manifold().require_on_manifold(x);
  const auto [p, q] = shifted_moments(s, f, x, bw);
  return quotient_hess(s.manifold(), x, p, q);
}

TangentGradient population_grad(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                                const Bandwidth& bw, bool normalized) {
  const PopulationMoments pm = population_moments(ctx, f, x, bw, normalized ? f(x) : 0.0);
  return normalized ? quotient_grad(ctx.manifold(), x, pm.f, pm.one) : tangent_grad_of(ctx.manifold(), x, pm.f);
}

TangentHessian population_hess(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                               const Bandwidth& bw, bool normalized) {
  const PopulationMoments pm = population_moments(ctx, f, x, bw, normalized ? f(x) : 0.0);
  return normalized ? quotient_hess(ctx.manifold(), x, pm.f, pm.one) : tangent_hess_of(ctx.manifold(), x, pm.f);
}

}  // namespace mks
