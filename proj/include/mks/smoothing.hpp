#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "mks/fields.hpp"
#include "mks/geometry.hpp"
#include "mks/kernels.hpp"
#include "mks/sampling.hpp"

namespace mks {

// Sample estimators. `f` holds f(X_i) in sample order. Sums are compensated and
// run in index order.

// T_{n,ε}[f](x) = (1/n) Σ K_ε(‖X_i − x‖) f(X_i)
double smooth_unnormalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);

// T_{n,ε}[f](x) / T_{n,ε}[1](x). Computed as f_ref + Σ w_i (f_i − f_ref) / Σ w_i
// with f_ref the value at the sample point nearest x and w_i the kernel weights
// rescaled by the largest one, then clamped to [min f, max f]. Constants come
// back exactly and far-away x does not underflow until T[1] itself would.
double smooth_normalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);

// T_{n,ε}[1](x)
double kde(const Sample& s, const Vector& x, const Bandwidth& bw);

// Nadaraya–Watson estimate from the sample's responses.
double nw_regress(const Sample& s, const Vector& x, const Bandwidth& bw);

// Σ_i K_ε(X_i − x) f_i scaled by 1/n, together with the first two x-derivatives
// of that sum:
//   grad = (1/n) Σ K_ε (X_i − x)/ε² f_i
//   hess = (1/n) Σ K_ε [(X_i − x)(X_i − x)ᵀ/ε⁴ − I/ε²] f_i
struct KernelMoments {
  double value = 0.0;
  Vector grad;
  Matrix hess;
};

KernelMoments sample_moments(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);

// Chart quadrature against the sampling distribution: periodic trapezoid rule
// on the (θ₁[, θ₂]) grid with masses (2π/N)^d · p(θ). Every integral is taken
// on a grid of N and of 2N nodes per axis (the coarse grid is the even-indexed
// subset of the fine one) and fails with ResolutionTooCoarse if the two differ
// by more than 1e-6 of the integrand's absolute mass.
class PopulationContext {
public:
  // `base_resolution` 0 selects 2048 (circle) or 512 (torus) nodes per axis.
  PopulationContext(Manifold m, DensitySpec spec, int base_resolution = 0);

  const Manifold& manifold() const { return manifold_; }
  const Density& density() const { return density_; }
  int base_resolution() const { return base_; }

  // Coarse nodes per axis used for bandwidth ε: the base, raised to a power of
  // two with node spacing at most ε/2 along the longest coordinate circle.
  int resolution_for(double eps) const;

  // out(u) writes `width` integrand values at ambient node u.
  using Integrand = std::function<void(const Vector& u, double* out)>;
  Vector integrate(double eps, int width, const Integrand& g) const;

private:
  struct Grid {
    Sample::PointMatrix points;
    Vector mass;
    std::vector<char> coarse;
  };
  const Grid& grid(int fine) const;

  Manifold manifold_;
  Density density_;
  int base_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const Grid>> grids_;
};

// T_ε[f](x) = ∫ K_ε(‖u − x‖) f(u) ρ(u) dvol(u), or its ratio with T_ε[1] when
// `normalized`.
double population_smooth(const PopulationContext& ctx, const ScalarField& f, const Vector& x, const Bandwidth& bw,
                         bool normalized);

// ε^{−d} ∫ K²(‖u − x‖/ε) ((f(u) − f(x))/ε)² ρ(u) dvol(u), K of unit bandwidth.
double population_variance_integral(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                                    const Bandwidth& bw);

// Population analogue of sample_moments for f − shift and for 1, in one pass.
struct PopulationMoments {
  KernelMoments f;
  KernelMoments one;
};
PopulationMoments population_moments(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                                     const Bandwidth& bw, double shift = 0.0);

}  // namespace mks
