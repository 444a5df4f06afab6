#pragma once

#include <span>

#include "mks/smoothing.hpp"

namespace mks {

// Coefficients in the manifold's tangent frame at the evaluation point.
struct TangentGradient {
  Vector coeffs;
  double norm() const { return coeffs.norm(); }
};

// Symmetric d×d matrix in the tangent frame; Frobenius norm.
struct TangentHessian {
  Matrix mat;
  double norm() const { return mat.norm(); }
};

// x-derivatives of T_{n,ε}[f] in ambient coordinates.
Vector ambient_grad_T(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);
Matrix ambient_hess_T(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);

// ∇_M and ∇²_M of T_{n,ε}[f] ∘ Exp_x at 0, through the tangent frame and the
// second fundamental form.
TangentGradient grad_unnormalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);
TangentHessian hess_unnormalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);

// Same for T̄_{n,ε}[f] via the quotient rule with p = T[f − f_ref], q = T[1].
// f_ref is the value at the sample point nearest x; subtracting it leaves T̄'s
// derivatives unchanged and makes constant f give exactly zero.
TangentGradient grad_normalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);
TangentHessian hess_normalized(const Sample& s, std::span<const double> f, const Vector& x, const Bandwidth& bw);

// Population versions. The kernel is differentiated under the integral; no
// finite differences.
TangentGradient population_grad(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                                const Bandwidth& bw, bool normalized);
TangentHessian population_hess(const PopulationContext& ctx, const ScalarField& f, const Vector& x,
                               const Bandwidth& bw, bool normalized);

// Pieces shared by the sample and population paths.
TangentGradient tangent_grad_of(const Manifold& m, const Vector& x, const KernelMoments& p);
TangentHessian tangent_hess_of(const Manifold& m, const Vector& x, const KernelMoments& p);
TangentGradient quotient_grad(const Manifold& m, const Vector& x, const KernelMoments& p, const KernelMoments& q);
TangentHessian quotient_hess(const Manifold& m, const Vector& x, const KernelMoments& p, const KernelMoments& q);

}  // namespace mks
