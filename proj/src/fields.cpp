#include "mks/fields.hpp"

#include <cmath>

#include "mks/errors.hpp"
#include "mks/sampling.hpp"

namespace mks {

ScalarField ScalarField::constant(double c) {
  return ScalarField(
      c == 1.0 ? "one" : "constant:" + std::to_string(c), [c](const Vector&) { return c; },
      [](const Vector& x) { return Vector::Zero(x.size()); },
      [](const Vector& x) { return Matrix::Zero(x.size(), x.size()); });
}

ScalarField ScalarField::circle_test() {
  return ScalarField(
      "circle_test", [](const Vector& x) { return std::exp(std::sin(x(0))) + x(1); },
      [](const Vector& x) {
        Vector g(2);
        g << std::cos(x(0)) * std::exp(std::sin(x(0))), 1.0;
        return g;
      },
      [](const Vector& x) {
        const double c = std::cos(x(0)), s = std::sin(x(0));
        Matrix h = Matrix::Zero(2, 2);
        h(0, 0) = std::exp(s) * (c * c - s);
        return h;
      });
}

ScalarField ScalarField::torus_test() {
  return ScalarField(
      "torus_test",
      [](const Vector& x) { return std::sin(x(0) - x(1)) + std::exp(-std::cos(x(0) + x(1))) + x(2) * x(2); },
      [](const Vector& x) {
        const double cd = std::cos(x(0) - x(1));
        const double e = std::exp(-std::cos(x(0) + x(1))) * std::sin(x(0) + x(1));
        Vector g(3);
        g << cd + e, -cd + e, 2.0 * x(2);
        return g;
      },
      [](const Vector& x) {
        const double sd = std::sin(x(0) - x(1));
        const double sum = x(0) + x(1);
        const double e = std::exp(-std::cos(sum)) * (std::cos(sum) + std::sin(sum) * std::sin(sum));
        Matrix h = Matrix::Zero(3, 3);
        h(0, 0) = -sd + e;
        h(1, 1) = -sd + e;
        h(0, 1) = h(1, 0) = sd + e;
        h(2, 2) = 2.0;
        return h;
      });
}

ScalarField ScalarField::cos_theta() {
  return ScalarField(
      "cos_theta", [](const Vector& x) { return x(0); },
      [](const Vector& x) {
        Vector g = Vector::Zero(x.size());
        g(0) = 1.0;
        return g;
      },
      [](const Vector& x) { return Matrix::Zero(x.size(), x.size()); });
}

ScalarField ScalarField::from_id(const std::string& id) {
  if (id == "one") return constant(1.0);
  if (id == "circle_test") return circle_test();
  if (id == "torus_test") return torus_test();
  if (id == "cos_theta") return cos_theta();
  const std::string prefix = "constant:";
  if (id.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const double c = std::stod(id.substr(prefix.size()), &used);
      if (used == id.size() - prefix.size() && std::isfinite(c)) return constant(c);
    } catch (const std::exception&) {
    }
  }
  throw Error(Errc::schema_error, "unknown function id '" + id + "'");
}

std::vector<double> ScalarField::on_sample(const Sample& s) const {
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = value_(s.point(i));
  return out;
}

Vector manifold_gradient(const Manifold& m, const ScalarField& f, const Vector& x) {
  return tangent_gradient(m.tangent_frame(x), f.gradient(x));
}

Matrix manifold_hessian(const Manifold& m, const ScalarField& f, const Vector& x) {
  return tangent_hessian(m.tangent_frame(x), m.second_fundamental_form(x), f.gradient(x), f.hessian(x));
}

double laplace_beltrami(const Manifold& m, const ScalarField& f, const Vector& x) {
  return -manifold_hessian(m, f, x).trace();
}

double weighted_laplacian(const Density& rho, const ScalarField& f, const Vector& x) {
  const Manifold& m = rho.manifold();
  return laplace_beltrami(m, f, x) - 2.0 * rho.gradient(x).dot(manifold_gradient(m, f, x)) / rho(x);
}

}  // namespace mks
