#include "mks/kernels.hpp"

#include <cmath>
#include <string>

#include "mks/errors.hpp"

namespace mks {

Bandwidth::Bandwidth(double eps, int dim) : eps_(eps), dim_(dim) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(Errc::range_error, "bandwidth must be positive and finite");
  if (dim != 1 && dim != 2) throw Error(Errc::range_error, "intrinsic dimension must be 1 or 2");
  norm_ = std::pow(kTwoPi * eps * eps, -0.5 * dim);
  inv_two_var_ = 1.0 / (2.0 * eps * eps);
}

double kernel_eval(double u, const Bandwidth& bw) {
  if (!(u >= 0.0)) throw Error(Errc::invalid_argument, "kernel argument must be nonnegative");
  return kernel_from_sq(u * u, bw);
}

Moment moment_from_name(std::string_view name) {
  if (name == "quadratic") return Moment::quadratic;
  if (name == "quadratic_sq") return Moment::quadratic_sq;
  if (name == "centered_outer") return Moment::centered_outer;
  if (name == "kernel_sq") return Moment::kernel_sq;
  if (name == "kernel_sq_quad") return Moment::kernel_sq_quad;
  if (name == "kernel_sq_quad_sq") return Moment::kernel_sq_quad_sq;
  throw Error(Errc::unknown_moment, "no kernel moment named '" + std::string(name) + "'");
}

MomentValue kernel_moment(Moment which, int dim, const std::optional<Matrix>& a) {
  const double sq_norm = std::pow(4.0 * kPi, -0.5 * dim);
  if (which == Moment::kernel_sq) return sq_norm;
  if (!a) throw Error(Errc::invalid_argument, "this moment needs a symmetric matrix A");
  if (a->rows() != dim || a->cols() != dim) throw Error(Errc::invalid_argument, "A must be d×d");
  if (!a->isApprox(a->transpose(), 1e-12) && (*a - a->transpose()).norm() > 1e-12)
    throw Error(Errc::invalid_argument, "A must be symmetric");
  const double tr = a->trace();
  const double fro2 = a->squaredNorm();
  switch (which) {
    case Moment::quadratic: return tr;
    case Moment::quadratic_sq: return 2.0 * fro2 + tr * tr;
    case Moment::centered_outer: return Matrix(2.0 * *a);
    case Moment::kernel_sq_quad: return tr * sq_norm / 2.0;
    case Moment::kernel_sq_quad_sq: return (2.0 * fro2 + tr * tr) * sq_norm / 4.0;
    case Moment::kernel_sq: break;
  }
  throw Error(Errc::unknown_moment, "unhandled moment");
}

}  // namespace mks
