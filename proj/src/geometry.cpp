#include "mks/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mks/errors.hpp"

namespace mks {

double wrap_angle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a value just below a multiple of 2π can round up to 2π itself.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

Matrix SecondFundamentalForm::component(int ell) const {
  Matrix b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = at(i, j)(ell);
  return b;
}

Vector SecondFundamentalForm::apply(const Vector& z) const {
  Vector out = Vector::Zero(entries.front().size());
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) out += z(i) * z(j) * at(i, j);
  return out;
}

Manifold Manifold::circle(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(Errc::range_error, "circle radius must be positive and finite");
  return Manifold(ManifoldKind::circle, radius, 0.0);
}

Manifold Manifold::torus(double major, double minor) {
  if (!(minor > 0.0) || !(major > minor) || !std::isfinite(major))
    throw Error(Errc::range_error, "torus requires major > minor > 0");
  return Manifold(ManifoldKind::torus, major, minor);
}

std::string Manifold::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == ManifoldKind::circle)
    os << "circle(R=" << major_ << ")";
  else
    os << "torus(R=" << major_ << ",r=" << minor_ << ")";
  return os.str();
}

Vector Manifold::chart_embed(const Vector& theta) const {
  if (theta.size() != intrinsic_dim())
    throw Error(Errc::invalid_argument, "chart coordinate has wrong length");
  if (kind_ == ManifoldKind::circle) {
    Vector x(2);
    x << major_ * std::cos(theta(0)), major_ * std::sin(theta(0));
    return x;
  }
  const double a = major_ + minor_ * std::cos(theta(1));
  Vector x(3);
  x << a * std::cos(theta(0)), a * std::sin(theta(0)), minor_ * std::sin(theta(1));
  return x;
}

Vector Manifold::chart_invert(const Vector& x) const {
  require_on_manifold(x);
  if (kind_ == ManifoldKind::circle) {
    Vector t(1);
    t << wrap_angle(std::atan2(x(1), x(0)));
    return t;
  }
  const double planar = std::hypot(x(0), x(1));
  Vector t(2);
  t << wrap_angle(std::atan2(x(1), x(0))), wrap_angle(std::atan2(x(2), planar - major_));
  return t;
}

double Manifold::on_manifold_residual(const Vector& x) const {
  if (x.size() != ambient_dim()) return std::numeric_limits<double>::infinity();
  if (kind_ == ManifoldKind::circle) return std::abs(x.norm() - major_);
  const double planar = std::hypot(x(0), x(1)) - major_;
  return std::abs(planar * planar + x(2) * x(2) - minor_ * minor_);
}

bool Manifold::contains(const Vector& x, double tol) const { return on_manifold_residual(x) <= tol; }

void Manifold::require_on_manifold(const Vector& x) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << "point with residual " << on_manifold_residual(x) << " is not on " << describe();
    throw Error(Errc::off_manifold, os.str());
  }
}

Matrix Manifold::tangent_frame(const Vector& x) const {
  const Vector t = chart_invert(x);
  if (kind_ == ManifoldKind::circle) {
    Matrix j(2, 1);
    j << -std::sin(t(0)), std::cos(t(0));
    return j;
  }
  const double c1 = std::cos(t(0)), s1 = std::sin(t(0));
  const double c2 = std::cos(t(1)), s2 = std::sin(t(1));
  Matrix j(3, 2);
  j << -s1, -s2 * c1,
        c1, -s2 * s1,
       0.0,  c2;
  return j;
}

SecondFundamentalForm Manifold::second_fundamental_form(const Vector& x) const {
  const Vector t = chart_invert(x);
  SecondFundamentalForm sff;
  sff.dim = intrinsic_dim();
  switch (kind_) {
    case ManifoldKind::circle: {
      Vector b(2);
      b << -std::cos(t(0)) / major_, -std::sin(t(0)) / major_;
      sff.entries = {b};
      return sff;
    }
    case ManifoldKind::torus: {
      const double c1 = std::cos(t(0)), s1 = std::sin(t(0));
      const double c2 = std::cos(t(1)), s2 = std::sin(t(1));
      const double a = major_ + minor_ * c2;
      Vector normal(3);
      normal << c2 * c1, c2 * s1, s2;
      const Vector b11 = -(c2 / a) * normal;
      const Vector b22 = -(1.0 / minor_) * normal;
      const Vector b12 = Vector::Zero(3);
      sff.entries = {b11, b12, b12, b22};
      return sff;
    }
  }
  throw Error(Errc::unsupported_manifold, "no analytic second fundamental form");
}

double Manifold::injectivity_radius() const {
  if (kind_ == ManifoldKind::circle) return kPi * major_;
  // Half the shorter of the meridian and the inner equator.
  return kPi * std::min(minor_, major_ - minor_);
}

Vector Manifold::exp_map(const Vector& x, const Vector& v) const {
  require_on_manifold(x);
  if (v.size() != intrinsic_dim()) throw Error(Errc::invalid_argument, "tangent vector has wrong length");
  if (v.norm() > injectivity_radius()) {
    std::ostringstream os;
    os << "|v| = " << v.norm() << " exceeds injectivity radius " << injectivity_radius();
    throw Error(Errc::step_too_large, os.str());
  }
  Vector t = chart_invert(x);
  if (kind_ == ManifoldKind::circle) {
    t(0) += v(0) / major_;
    return chart_embed(t);
  }
  const double a = major_ + minor_ * std::cos(t(1));
  const bool on_equator = std::abs(std::sin(t(1))) < 1e-15;
  if (v(0) == 0.0) {
    t(1) += v(1) / minor_;
    return chart_embed(t);
  }
  if (v(1) == 0.0 && on_equator) {
    t(0) += v(0) / a;
    return chart_embed(t);
  }
  return chart_embed(torus_geodesic(t, v));
}

// Geodesic equations for ds² = a(θ₂)² dθ₁² + r² dθ₂² with a = R + r cos θ₂.
Vector Manifold::torus_geodesic(const Vector& theta, const Vector& v) const {
  using State = Eigen::Vector4d;
  const double r = minor_;
  const double big_r = major_;
  auto rhs = [r, big_r](const State& s) {
    const double a = big_r + r * std::cos(s(1));
    const double sn = std::sin(s(1));
    State ds;
    ds << s(2), s(3), 2.0 * r * sn / a * s(2) * s(3), -a * sn / r * s(2) * s(2);
    return ds;
  };
  const double a0 = big_r + r * std::cos(theta(1));
  State s;
  s << theta(0), theta(1), v(0) / a0, v(1) / r;
  const int steps = std::max(400, static_cast<int>(std::ceil(v.norm() / 2e-4)));
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const State k1 = rhs(s);
    const State k2 = rhs(s + 0.5 * h * k1);
    const State k3 = rhs(s + 0.5 * h * k2);
    const State k4 = rhs(s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  Vector out(2);
  out << s(0), s(1);
  return out;
}

double Manifold::volume_form(const Vector& theta) const {
  if (kind_ == ManifoldKind::circle) return major_;
  return minor_ * (major_ + minor_ * std::cos(theta(1)));
}

double Manifold::total_volume() const {
  if (kind_ == ManifoldKind::circle) return kTwoPi * major_;
  return 4.0 * kPi * kPi * major_ * minor_;
}

double bias_curvature_coefficient(const SecondFundamentalForm& sff) {
  const int d = sff.dim;
  const int big_d = static_cast<int>(sff.entries.front().size());
  // E(zᵀBz)² = 2‖B‖_F² + (tr B)² for z ~ N(0, I).
  double mean_sq = 0.0;
  for (int ell = 0; ell < big_d; ++ell) {
    const Matrix b = sff.component(ell);
    mean_sq += 2.0 * b.squaredNorm() + b.trace() * b.trace();
  }
  // tr Ric = ‖Σ_i b_ii‖² − Σ_ij ‖b_ij‖².
  Vector mean_curv = Vector::Zero(big_d);
  double total_sq = 0.0;
  for (int i = 0; i < d; ++i) {
    mean_curv += sff.at(i, i);
    for (int j = 0; j < d; ++j) total_sq += sff.at(i, j).squaredNorm();
  }
  const double ricci_trace = mean_curv.squaredNorm() - total_sq;
  return -mean_sq / 12.0 + ricci_trace / 3.0;
}

Vector tangent_gradient(const Matrix& frame, const Vector& ambient_grad) { return frame.transpose() * ambient_grad; }

Matrix tangent_hessian(const Matrix& frame, const SecondFundamentalForm& sff, const Vector& ambient_grad,
                       const Matrix& ambient_hess) {
  Matrix h = frame.transpose() * ambient_hess * frame;
  for (int ell = 0; ell < ambient_grad.size(); ++ell) h += ambient_grad(ell) * sff.component(ell);
  return 0.5 * (h + h.transpose());
}

std::string DensitySpec::describe() const {
  if (kind == DensityKind::uniform) return "uniform";
  std::ostringstream os;
  os.precision(17);
  os << "vonmises_sine(mu1=" << mu1 << ",mu2=" << mu2 << ",kappa1=" << kappa1 << ",kappa2=" << kappa2
     << ",kappa3=" << kappa3 << ")";
  return os.str();
}

Density::Density(Manifold manifold, DensitySpec spec) : manifold_(manifold), spec_(spec) {
  if (spec_.kind == DensityKind::uniform) return;
  if (manifold_.kind() != ManifoldKind::torus)
    throw Error(Errc::unsupported_manifold, "the von Mises sine model is defined on the torus only");
  // Periodic trapezoid rule, spectrally accurate for this integrand.
  constexpr int kNodes = 256;
  const double h = kTwoPi / kNodes;
  double sum = 0.0;
  Vector theta(2);
  for (int i = 0; i < kNodes; ++i) {
    for (int j = 0; j < kNodes; ++j) {
      theta << i * h, j * h;
      sum += std::exp(log_unnormalized(theta));
    }
  }
  normalizer_ = sum * h * h;
}

double Density::log_unnormalized(const Vector& theta) const {
  const double d1 = theta(0) - spec_.mu1;
  const double d2 = theta(1) - spec_.mu2;
  return spec_.kappa1 * std::cos(d1) + spec_.kappa2 * std::cos(d2) + spec_.kappa3 * std::sin(d1) * std::sin(d2);
}

double Density::chart_density(const Vector& theta) const {
  if (spec_.kind == DensityKind::uniform) return manifold_.volume_form(theta) / manifold_.total_volume();
  return std::exp(log_unnormalized(theta)) / normalizer_;
}

double Density::at_chart(const Vector& theta) const {
  if (spec_.kind == DensityKind::uniform) return 1.0 / manifold_.total_volume();
  return chart_density(theta) / manifold_.volume_form(theta);
}

double Density::operator()(const Vector& x) const { return at_chart(manifold_.chart_invert(x)); }

Vector Density::gradient(const Vector& x) const {
  const Vector t = manifold_.chart_invert(x);
  if (spec_.kind == DensityKind::uniform) return Vector::Zero(manifold_.intrinsic_dim());
  const double rho = at_chart(t);
  const double r = manifold_.minor_radius();
  const double a = manifold_.major_radius() + r * std::cos(t(1));
  const double d1 = t(0) - spec_.mu1;
  const double d2 = t(1) - spec_.mu2;
  const double dlog1 = -spec_.kappa1 * std::sin(d1) + spec_.kappa3 * std::cos(d1) * std::sin(d2);
  const double dlog2 = -spec_.kappa2 * std::sin(d2) + spec_.kappa3 * std::sin(d1) * std::cos(d2) + r * std::sin(t(1)) / a;
  Vector g(2);
  g << rho * dlog1 / a, rho * dlog2 / r;
  return g;
}

double density_vol(const Manifold& m, const DensitySpec& spec, const Vector& x) { return Density(m, spec)(x); }

}  // namespace mks
