#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mks/geometry.hpp"

namespace mks {

enum class StatisticKind { unnormalized, normalized, critical, laplacian, regression };

std::string_view statistic_name(StatisticKind kind);

struct LimitVariance {
  StatisticKind kind;
  double sigma2;
  std::vector<std::pair<std::string, double>> ingredients;
};

// ρ f² / (4π)^{d/2}
LimitVariance sigma_unnormalized(double rho, double fx, int dim);
// ‖∇f‖² / (2 (4π)^{d/2} ρ)
LimitVariance sigma_normalized(double rho, double grad_norm, int dim);
// (2‖∇²f‖_F² + |Δf|²) / (16 (4π)^{d/2} ρ)
LimitVariance sigma_critical(double rho, double hess_frob, double lap_abs, int dim);
// Var(Y | X = x) / ((4π)^{d/2} ρ)
LimitVariance sigma_regression(double rho, double var_y, int dim);
// Limit variance of √(nε^{d+2})(Δ_{n}f − center). The estimator smooths at
// bandwidth √2ε while the scaling uses ε, so this is 2^{1−d/2} times the
// normalized-smoothing variance at the same point.
LimitVariance sigma_laplacian(double rho, double grad_norm, int dim);

// √(nε^d), √(nε^{d−2}), ε⁻¹√(nε^{d−2}), √(nε^{d+2}), √(nε^d) by kind.
double statistic_scale(StatisticKind kind, double n, double eps, int dim);
double standardize(StatisticKind kind, double estimate, double center, double n, double eps, int dim);

// sup_t |F̂(t) − Φ(t/σ)| evaluated on both sides of every jump of F̂.
double ks_distance(std::span<const double> xs, double sigma2);

// sup_r |P̂(‖Σ^{−1/2}x‖ ≤ r) − χ²_m(r²)| over observed radii. Rows of `xs` are
// replicates; `sigma2` is the diagonal of Σ.
double mahalanobis_ball_distance(const Matrix& xs, const Vector& sigma2);

double sample_mean(std::span<const double> xs);
// Unbiased (B − 1) variance.
double sample_variance(std::span<const double> xs);

// Angles θ ∈ [0, 2π) where the arclength derivative of e^{sin x₁} + x₂ on the
// circle of the given radius vanishes, ascending, to 1e-12 in θ.
std::vector<double> circle_test_critical_angles(double radius);

}  // namespace mks
