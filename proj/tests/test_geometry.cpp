#include <cmath>

#include "doctest.h"
#include "mks/errors.hpp"
#include "mks/fields.hpp"
#include "mks/geometry.hpp"
#include "oracles.hpp"

using namespace mks;

namespace {

Vector v1(double a) {
  Vector v(1);
  v << a;
  return v;
}
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
Vector v3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

const Manifold kCircle5 = Manifold::circle(5.0);
const Manifold kTorus = Manifold::torus(0.5, 1.0 / 3.0);

}  // namespace

TEST_CASE("chart embedding of the experiment points") {
  CHECK((kCircle5.chart_embed(v1(0.0)) - v2(5.0, 0.0)).norm() < 1e-15);
  CHECK((kTorus.chart_embed(v2(0.0, 0.0)) - v3(5.0 / 6.0, 0.0, 0.0)).norm() < 1e-15);
  CHECK((kTorus.chart_embed(v2(0.0, kPi)) - v3(1.0 / 6.0, 0.0, 0.0)).norm() < 1e-15);
  CHECK((kTorus.chart_embed(v2(1.5 * kPi, 0.5 * kPi)) - v3(0.0, -0.5, 1.0 / 3.0)).norm() < 1e-15);
}

TEST_CASE("construction rejects bad radii") {
  CHECK_THROWS_AS(Manifold::circle(0.0), Error);
  CHECK_THROWS_AS(Manifold::torus(0.3, 0.3), Error);
  CHECK_THROWS_AS(Manifold::torus(0.5, -0.1), Error);
}

TEST_CASE("chart inversion round trip and off-manifold rejection") {
  for (int i = 0; i < 50; ++i) {
    const Vector t = v2(0.13 * i, 0.29 * i + 0.1);
    const Vector x = kTorus.chart_embed(t);
    CHECK((kTorus.chart_embed(kTorus.chart_invert(x)) - x).norm() < 1e-9);
    CHECK(kTorus.contains(x));
  }
  const Vector c = kCircle5.chart_embed(v1(2.0));
  CHECK((kCircle5.chart_embed(kCircle5.chart_invert(c)) - c).norm() < 1e-9);
  try {
    kCircle5.tangent_frame(v2(5.0, 0.1));
    FAIL("expected OffManifold");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::off_manifold);
  }
  CHECK_THROWS_AS(kTorus.second_fundamental_form(v3(1.0, 0.0, 0.0)), Error);
}

TEST_CASE("tangent frames") {
  const Matrix jc = kCircle5.tangent_frame(v2(5.0, 0.0));
  CHECK(jc(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(jc(1, 0) == doctest::Approx(1.0));
  const Matrix jt = kTorus.tangent_frame(v3(5.0 / 6.0, 0.0, 0.0));
  CHECK((jt.col(0) - v3(0, 1, 0)).norm() < 1e-15);
  CHECK((jt.col(1) - v3(0, 0, 1)).norm() < 1e-15);
  for (int i = 0; i < 40; ++i) {
    const Vector x = kTorus.chart_embed(v2(0.17 * i, 0.41 * i));
    const Matrix j = kTorus.tangent_frame(x);
    CHECK((j.transpose() * j - Matrix::Identity(2, 2)).norm() < 1e-9);
    // columns are the normalized chart partials
    const double h = 1e-6;
    const Vector t = kTorus.chart_invert(x);
    const Vector d1 = (kTorus.chart_embed(t + v2(h, 0)) - kTorus.chart_embed(t - v2(h, 0))).normalized();
    CHECK((d1 - j.col(0)).norm() < 1e-8);
  }
}

TEST_CASE("second fundamental form") {
  const auto sc = kCircle5.second_fundamental_form(v2(5.0, 0.0));
  CHECK((sc.at(0, 0) - v2(-0.2, 0.0)).norm() < 1e-15);
  for (int k = 0; k < 8; ++k) {
    const Vector x = kCircle5.chart_embed(v1(kTwoPi * k / 8));
    CHECK(kCircle5.second_fundamental_form(x).at(0, 0).norm() == doctest::Approx(0.2).epsilon(1e-12));
  }
  for (int i = 0; i < 30; ++i) {
    const double t1 = 0.21 * i, t2 = 0.37 * i + 0.05;
    const Vector x = kTorus.chart_embed(v2(t1, t2));
    const auto b = kTorus.second_fundamental_form(x);
    const Matrix j = kTorus.tangent_frame(x);
    const auto ref = oracle::torus_sff_fd(0.5, 1.0 / 3.0, t1, t2);
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) {
        CHECK((j.transpose() * b.at(a, c)).norm() < 1e-9);
        CHECK((b.at(a, c) - ref[static_cast<std::size_t>(2 * a + c)]).norm() < 1e-5);
        CHECK(b.at(a, c) == b.at(c, a));
      }
  }
}

TEST_CASE("exponential map") {
  const Vector x = v2(5.0, 0.0);
  CHECK((kCircle5.exp_map(x, v1(2.5 * kPi)) - v2(0.0, 5.0)).norm() < 1e-12);
  CHECK((kCircle5.exp_map(x, v1(0.0)) - x).norm() == 0.0);
  CHECK_THROWS_AS(kCircle5.exp_map(x, v1(5.0 * kPi + 0.1)), Error);

  // chord-arc expansion on the circle: exact chord is 2R sin(z/2R)
  for (double z : {0.4, 0.2, 0.1, 0.05}) {
    const double lhs = (kCircle5.exp_map(x, v1(z)) - x).squaredNorm() - z * z;
    const double lead = -std::pow(z, 4) / (12.0 * 25.0);
    const double next = std::pow(z, 6) / (360.0 * 625.0);
    CHECK(std::abs(lhs - lead) <= 1.5 * next + 1e-15);
  }

  // torus: meridian closed form against RK4, and the Taylor remainder shrinking
  const Vector p = kTorus.chart_embed(v2(0.3, 1.1));
  const Vector along = kTorus.exp_map(p, v2(0.0, 0.2));
  CHECK(kTorus.contains(along));
  const auto b = kTorus.second_fundamental_form(p);
  double prev = 1.0;
  for (double s : {0.08, 0.04, 0.02}) {
    const Vector z = v2(0.6 * s, 0.8 * s);
    const Vector e = kTorus.exp_map(p, z);
    CHECK(kTorus.contains(e, 1e-9));
    const double chord = (e - p).norm();
    CHECK(chord <= z.norm() + 1e-12);
    CHECK(chord >= 0.5 * z.norm());
    const double rem = std::abs((e - p).squaredNorm() - z.squaredNorm() + b.apply(z).squaredNorm() / 12.0);
    const double ratio = rem / std::pow(z.norm(), 4);
    CHECK(ratio < prev);
    prev = ratio;
  }
}

TEST_CASE("volume form and densities") {
  CHECK(kCircle5.volume_form(v1(1.0)) == 5.0);
  CHECK(kTorus.volume_form(v2(0.3, kPi)) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
  CHECK(kCircle5.total_volume() == doctest::Approx(10.0 * kPi));

  CHECK(density_vol(kCircle5, DensitySpec::uniform(), v2(5.0, 0.0)) == doctest::Approx(1.0 / (10.0 * kPi)));
  const Vector q = kTorus.chart_embed(v2(1.0, 2.0));
  CHECK(density_vol(kTorus, DensitySpec::uniform(), q) == doctest::Approx(1.0 / (4.0 * kPi * kPi * 0.5 / 3.0)));

  const DensitySpec vm = DensitySpec::vonmises_sine(0, 0, 1, 1, 0);
  const Density rho(kTorus, vm);
  CHECK(rho.normalizer() == doctest::Approx(oracle::vonmises_normalizer_bessel(1.0, 1.0)).epsilon(1e-13));
  const double expect = std::exp(2.0) / (rho.normalizer() * kTorus.volume_form(v2(0, 0)));
  CHECK(density_vol(kTorus, vm, v3(5.0 / 6.0, 0, 0)) == doctest::Approx(expect).epsilon(1e-13));
  CHECK_THROWS_AS(Density(kCircle5, vm), Error);

  // ∫ ρ dvol = 1 by a tensor trapezoid rule on the chart
  for (const auto& spec : {DensitySpec::uniform(), vm, DensitySpec::vonmises_sine(0.5, -1.0, 2.0, 0.5, 0.7)}) {
    const Density r(kTorus, spec);
    const int N = 200;
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const Vector t = v2(kTwoPi * i / N, kTwoPi * j / N);
        s += r.at_chart(t) * kTorus.volume_form(t);
      }
    CHECK(s * std::pow(kTwoPi / N, 2) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("density gradient matches finite differences along the frame") {
  const Density rho(kTorus, DensitySpec::vonmises_sine(0.2, -0.4, 1.0, 1.5, 0.6));
  for (int i = 0; i < 10; ++i) {
    const Vector t = v2(0.6 * i + 0.1, 0.45 * i + 0.3);
    const Vector x = kTorus.chart_embed(t);
    const Vector g = rho.gradient(x);
    const double a = 0.5 + std::cos(t(1)) / 3.0;
    const double h = 1e-6;
    const double d1 = (rho.at_chart(t + v2(h, 0)) - rho.at_chart(t - v2(h, 0))) / (2 * h) / a;
    const double d2 = (rho.at_chart(t + v2(0, h)) - rho.at_chart(t - v2(0, h))) / (2 * h) / (1.0 / 3.0);
    CHECK(g(0) == doctest::Approx(d1).epsilon(1e-6));
    CHECK(g(1) == doctest::Approx(d2).epsilon(1e-6));
  }
}

TEST_CASE("bias curvature coefficient") {
  for (double R : {1.0, 5.0, 0.3}) {
    const Manifold c = Manifold::circle(R);
    CHECK(bias_curvature_coefficient(c.second_fundamental_form(c.chart_embed(v1(0.7)))) ==
          doctest::Approx(-0.25 / (R * R)).epsilon(1e-14));
  }
  // The coefficient is a quadrature-free combination of II; cross-check the
  // Gaussian average E‖II(z,z)‖² on the torus by Gauss–Legendre.
  const Vector x = kTorus.chart_embed(v2(0.4, 2.2));
  const auto b = kTorus.second_fundamental_form(x);
  const auto rule = oracle::gauss_legendre(80, -8, 8);
  const double mean_sq = oracle::integrate_2d(rule, [&](double z1, double z2) {
    return oracle::unit_kernel(z1 * z1 + z2 * z2, 2) * b.apply(v2(z1, z2)).squaredNorm();
  });
  const double t2 = 2.2, a = 0.5 + std::cos(t2) / 3.0;
  const double gauss_curv = std::cos(t2) / (a / 3.0);  // K = cos θ₂ / (r a), tr Ric = 2K
  CHECK(bias_curvature_coefficient(b) == doctest::Approx(-mean_sq / 12.0 + 2.0 * gauss_curv / 3.0).epsilon(1e-10));
}

TEST_CASE("intrinsic derivatives of fields") {
  const Manifold unit = Manifold::circle(1.0);
  const ScalarField f = ScalarField::cos_theta();
  for (double t : {0.0, 0.5, 1.5707963267948966, 2.0}) {
    const Vector x = unit.chart_embed(v1(t));
    CHECK(manifold_gradient(unit, f, x)(0) == doctest::Approx(-std::sin(t)).epsilon(1e-14));
    CHECK(manifold_hessian(unit, f, x)(0, 0) == doctest::Approx(-std::cos(t)).epsilon(1e-14));
    CHECK(laplace_beltrami(unit, f, x) == doctest::Approx(std::cos(t)).epsilon(1e-14));
  }
  // torus test function: second arclength derivative along a meridian by differences
  const ScalarField g = ScalarField::torus_test();
  const Vector t = v2(0.8, 1.3);
  const Vector x = kTorus.chart_embed(t);
  const double r = 1.0 / 3.0, h = 1e-4;
  auto along = [&](double s) { return g(kTorus.chart_embed(v2(t(0), t(1) + s / r))); };
  const double fd2 = (along(h) - 2 * along(0) + along(-h)) / (h * h);
  CHECK(manifold_hessian(kTorus, g, x)(1, 1) == doctest::Approx(fd2).epsilon(1e-6));
  const double fd1 = (along(h) - along(-h)) / (2 * h);
  CHECK(manifold_gradient(kTorus, g, x)(1) == doctest::Approx(fd1).epsilon(1e-7));
}
