#pragma once

#include <cmath>
#include <optional>
#include <string_view>
#include <variant>

#include "mks/geometry.hpp"

namespace mks {

// Gaussian kernel bandwidth ε together with the intrinsic dimension d that
// sets the normalization (2πε²)^{−d/2}.
class Bandwidth {
public:
  Bandwidth(double eps, int dim);

  double eps() const { return eps_; }
  int dim() const { return dim_; }
  // (2πε²)^{−d/2}
  double normalization() const { return norm_; }
  // 1/(2ε²)
  double inv_two_var() const { return inv_two_var_; }

  Bandwidth scaled(double factor) const { return Bandwidth(eps_ * factor, dim_); }

private:
  double eps_;
  int dim_;
  double norm_;
  double inv_two_var_;
};

// K_ε(u) = (2πε²)^{−d/2} exp(−u²/(2ε²)), u ≥ 0.
double kernel_eval(double u, const Bandwidth& bw);
// Same kernel from a squared distance; the form used in inner loops.
inline double kernel_from_sq(double u2, const Bandwidth& bw) {
  return bw.normalization() * std::exp(-u2 * bw.inv_two_var());
}

// Closed-form Gaussian moments over R^d with K the unit-bandwidth kernel:
//   quadratic        ∫K zᵀAz                 = tr A
//   quadratic_sq     ∫K (zᵀAz)²              = 2‖A‖_F² + (tr A)²
//   centered_outer   ∫K (zzᵀ − I)(zᵀAz)      = 2A
//   kernel_sq        ∫K²                     = (4π)^{−d/2}
//   kernel_sq_quad   ∫K² zᵀAz                = tr A / (2(4π)^{d/2})
//   kernel_sq_quad_sq ∫K² (zᵀAz)²            = (2‖A‖_F² + (tr A)²) / (4(4π)^{d/2})
enum class Moment { quadratic, quadratic_sq, centered_outer, kernel_sq, kernel_sq_quad, kernel_sq_quad_sq };

Moment moment_from_name(std::string_view name);

using MomentValue = std::variant<double, Matrix>;

MomentValue kernel_moment(Moment which, int dim, const std::optional<Matrix>& a = std::nullopt);

}  // namespace mks
