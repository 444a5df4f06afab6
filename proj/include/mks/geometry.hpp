#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mks {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Absolute tolerance of the on-manifold check. Built-in points all come from
// the chart map in double precision.
inline constexpr double kOnManifoldTol = 1e-9;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Reduces an angle to [0, 2π).
double wrap_angle(double angle);

enum class ManifoldKind { circle, torus };

// II_x(e_i, e_j) for the orthonormal tangent frame at x. Stored row-major over
// (i, j); every entry is a length-D normal vector.
struct SecondFundamentalForm {
  int dim = 0;
  std::vector<Vector> entries;

  const Vector& at(int i, int j) const { return entries[static_cast<std::size_t>(i * dim + j)]; }

  // d×d matrix of the ℓ-th ambient component, (B_ℓ)_ij = [b_ij]_ℓ.
  Matrix component(int ell) const;

  // II(z, z) = Σ z_i z_j b_ij.
  Vector apply(const Vector& z) const;
};

// A compact manifold embedded in Euclidean space with known chart, frame and
// curvature. Only the circle in R² and the torus of revolution in R³ exist.
class Manifold {
public:
  static Manifold circle(double radius);
  static Manifold torus(double major, double minor);

  ManifoldKind kind() const { return kind_; }
  int intrinsic_dim() const { return kind_ == ManifoldKind::circle ? 1 : 2; }
  int ambient_dim() const { return kind_ == ManifoldKind::circle ? 2 : 3; }

  // Circle: radius. Torus: R (distance from the axis to the tube centre).
  double major_radius() const { return major_; }
  // Torus tube radius; zero for the circle.
  double minor_radius() const { return minor_; }

  std::string describe() const;

  Vector chart_embed(const Vector& theta) const;
  Vector chart_invert(const Vector& x) const;

  double on_manifold_residual(const Vector& x) const;
  bool contains(const Vector& x, double tol = kOnManifoldTol) const;
  void require_on_manifold(const Vector& x) const;

  // Columns: circle (−sin θ, cos θ); torus normalized ∂θ₁ then ∂θ₂.
  Matrix tangent_frame(const Vector& x) const;
  SecondFundamentalForm second_fundamental_form(const Vector& x) const;

  // Exponential map with tangent coefficients v expressed in tangent_frame(x).
  // Closed form on the circle and along torus meridians (and along the two
  // equators, which are geodesics); RK4 integration of the geodesic equation
  // otherwise.
  Vector exp_map(const Vector& x, const Vector& v) const;
  double injectivity_radius() const;

  // Riemannian volume element with respect to dθ in chart coordinates.
  double volume_form(const Vector& theta) const;
  double total_volume() const;

  friend bool operator==(const Manifold&, const Manifold&) = default;

private:
  Manifold(ManifoldKind kind, double major, double minor) : kind_(kind), major_(major), minor_(minor) {}

  Vector torus_geodesic(const Vector& theta, const Vector& v) const;

  ManifoldKind kind_;
  double major_;
  double minor_;
};

// Curvature coefficient c(x) of the second-order bias of unnormalized
// smoothing: c = −E‖II(z,z)‖²/12 + tr Ric/3 with z ~ N(0, I_d), Ric from the
// Gauss equation. Equals −1/(4R²) on a circle of radius R.
double bias_curvature_coefficient(const SecondFundamentalForm& sff);

// Manifold gradient (tangent coefficients) and Hessian in normal coordinates of
// an ambient function with ambient gradient g and Hessian H at x:
// ∇ = Jᵀg, ∇² = JᵀHJ + Σ_ℓ g_ℓ B_ℓ.
Vector tangent_gradient(const Matrix& frame, const Vector& ambient_grad);
Matrix tangent_hessian(const Matrix& frame, const SecondFundamentalForm& sff, const Vector& ambient_grad,
                       const Matrix& ambient_hess);

enum class DensityKind { uniform, vonmises_sine };

struct DensitySpec {
  DensityKind kind = DensityKind::uniform;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;

  static DensitySpec uniform() { return {}; }
  static DensitySpec vonmises_sine(double mu1, double mu2, double kappa1, double kappa2, double kappa3) {
    return {DensityKind::vonmises_sine, mu1, mu2, kappa1, kappa2, kappa3};
  }

  std::string describe() const;
  friend bool operator==(const DensitySpec&, const DensitySpec&) = default;
};

// Sampling density on a manifold. The von Mises sine model is specified over
// the angles (θ₁, θ₂); it is converted to a density with respect to the volume
// measure by dividing by the volume form. Its normalizer over dθ comes from a
// 256×256 periodic trapezoid rule.
class Density {
public:
  Density(Manifold manifold, DensitySpec spec);

  const Manifold& manifold() const { return manifold_; }
  const DensitySpec& spec() const { return spec_; }
  bool is_uniform() const { return spec_.kind == DensityKind::uniform; }

  // Normalized density of the chart angles with respect to dθ.
  double chart_density(const Vector& theta) const;
  // ρ with respect to the volume measure, at a chart point.
  double at_chart(const Vector& theta) const;
  // ρ with respect to the volume measure at an ambient point.
  double operator()(const Vector& x) const;
  // Tangent-frame coefficients of ∇_M ρ at x.
  Vector gradient(const Vector& x) const;

  // ∫ exp(κ₁cos(θ₁−μ₁) + κ₂cos(θ₂−μ₂) + κ₃ sin sin) dθ for the sine model; 1
  // for uniform.
  double normalizer() const { return normalizer_; }

private:
  double log_unnormalized(const Vector& theta) const;

  Manifold manifold_;
  DensitySpec spec_;
  double normalizer_ = 1.0;
};

double density_vol(const Manifold& m, const DensitySpec& spec, const Vector& x);

}  // namespace mks
