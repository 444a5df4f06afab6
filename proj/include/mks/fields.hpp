#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mks/geometry.hpp"

namespace mks {

class Sample;

// A real function on ambient space with analytic first and second
// derivatives. Restricted to a manifold it is the f (or regression mean g)
// that estimators smooth; the symbolic id lets population oracles re-evaluate
// it on quadrature nodes.
class ScalarField {
public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  using HessFn = std::function<Matrix(const Vector&)>;

  ScalarField(std::string id, ValueFn value, GradFn grad, HessFn hess)
      : id_(std::move(id)), value_(std::move(value)), grad_(std::move(grad)), hess_(std::move(hess)) {}

  // f ≡ c.
  static ScalarField constant(double c);
  // e^{sin x₁} + x₂ (circle experiment).
  static ScalarField circle_test();
  // sin(x₁ − x₂) + e^{−cos(x₁ + x₂)} + x₃² (torus experiment).
  static ScalarField torus_test();
  // x₁, which is cos θ on the unit circle.
  static ScalarField cos_theta();
  // Resolves "one", "constant:<c>", "circle_test", "torus_test", "cos_theta".
  static ScalarField from_id(const std::string& id);

  const std::string& id() const { return id_; }
  double operator()(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return grad_(x); }
  Matrix hessian(const Vector& x) const { return hess_(x); }

  // Values at every sample point, in sample order.
  std::vector<double> on_sample(const Sample& s) const;

private:
  std::string id_;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
};

// Intrinsic derivatives of a field at x ∈ M.
Vector manifold_gradient(const Manifold& m, const ScalarField& f, const Vector& x);
Matrix manifold_hessian(const Manifold& m, const ScalarField& f, const Vector& x);
// Δ_M f = −div ∇f = −tr ∇²f (normal coordinates); nonnegative spectrum.
double laplace_beltrami(const Manifold& m, const ScalarField& f, const Vector& x);
// Δ_{M,2} f = Δ_M f − 2⟨∇ρ, ∇f⟩/ρ.
double weighted_laplacian(const Density& rho, const ScalarField& f, const Vector& x);

}  // namespace mks
