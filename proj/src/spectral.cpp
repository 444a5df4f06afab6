#include "mks/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <lapacke.h>

#include "mks/errors.hpp"
#include "mks/smoothing.hpp"
#include "mks/summation.hpp"

namespace mks {

namespace {

Matrix plain_affinity(const Sample& s, const Bandwidth& bw) {
  const Eigen::Index n = s.size();
  Matrix a(n, n);
  const auto& p = s.points();
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = bw.normalization();
    for (Eigen::Index j = i + 1; j < n; ++j) a(i, j) = a(j, i) = kernel_from_sq((p.row(i) - p.row(j)).squaredNorm(), bw);
  }
  return a;
}

Vector row_sums(const Matrix& a) {
  Vector d(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    NeumaierSum acc;
    for (Eigen::Index j = 0; j < a.cols(); ++j) acc += a(j, i);  // symmetric; column walk is contiguous
    d(i) = acc.value();
  }
  return d;
}

void require_pairs(const Sample& s) {
  if (s.size() < 2) throw Error(Errc::empty_sample, "a graph Laplacian needs at least two points");
}

void write_g17(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

double pointwise_laplacian(const Sample& s, std::span<const double> f, double fx, const Vector& x,
                           const Bandwidth& bw) {
  const double e2 = bw.eps() * bw.eps();
  return (fx - smooth_normalized(s, f, x, bw.scaled(std::sqrt(2.0)))) / e2;
}

Vector GraphLaplacian::apply(const Vector& f) const {
  if (f.size() != size()) throw Error(Errc::invalid_argument, "vector length does not match the Laplacian");
  const double b2 = beta * beta;
  Vector out(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    NeumaierSum acc;
    for (Eigen::Index j = 0; j < size(); ++j) acc += affinity(j, i) * f(j);
    out(i) = (f(i) - acc.value() / degree(i)) / b2;
  }
  return out;
}

Matrix GraphLaplacian::to_dense() const {
  Matrix l = -(degree.cwiseInverse().asDiagonal() * affinity);
  l.diagonal().array() += 1.0;
  return l / (beta * beta);
}

GraphLaplacian build_rw_laplacian(const Sample& s, double eps) {
  require_pairs(s);
  const Bandwidth bw = Bandwidth(eps, s.manifold().intrinsic_dim()).scaled(std::sqrt(2.0));
  GraphLaplacian L;
  L.kind = AffinityKind::plain;
  L.affinity = plain_affinity(s, bw);
  L.degree = row_sums(L.affinity);
  L.beta = eps;
  return L;
}

GraphLaplacian build_reweighted_laplacian(const Sample& s, double eta, Vector* q_out) {
  require_pairs(s);
  const Bandwidth bw = Bandwidth(eta, s.manifold().intrinsic_dim()).scaled(std::sqrt(2.0));
  GraphLaplacian L;
  L.kind = AffinityKind::reweighted;
  L.affinity = plain_affinity(s, bw);
  const Vector q = row_sums(L.affinity);
  const Vector qinv = q.cwiseInverse();
  L.affinity = qinv.asDiagonal() * L.affinity * qinv.asDiagonal();
  L.affinity = 0.5 * (L.affinity + L.affinity.transpose()).eval();
  L.degree = row_sums(L.affinity);
  L.beta = eta;
  if (q_out) *q_out = q;
  return L;
}

SpectralDecomposition eigendecompose(const GraphLaplacian& L, int count) {
  const auto n = static_cast<lapack_int>(L.size());
  if (count < 1 || count > n) throw Error(Errc::invalid_argument, "eigenpair count must lie in [1, n]");
  const Vector dis = L.degree.cwiseSqrt().cwiseInverse();
  Matrix sym = dis.asDiagonal() * L.affinity * dis.asDiagonal();
  std::vector<double> w(static_cast<std::size_t>(n));
  Matrix z(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, sym.data(), n, 0.0, 0.0, n - count + 1, n, 0.0, &found,
                     w.data(), z.data(), n, support.data());
  if (info != 0 || found != count)
    throw Error(Errc::convergence_failure, "dsyevr failed with info " + std::to_string(info));

  SpectralDecomposition dec;
  dec.values.resize(count);
  dec.vectors.resize(n, count);
  const double b2 = L.beta * L.beta;
  for (int j = 0; j < count; ++j) {
    const int src = count - 1 - j;  // dsyevr returns ascending λ_S
    dec.values(j) = (1.0 - w[static_cast<std::size_t>(src)]) / b2;
    Vector v = dis.asDiagonal() * z.col(src);
    v /= v.norm();
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    dec.vectors.col(j) = v;
  }
  dec.norm = EigenNorm::euclidean;
  return dec;
}

Vector ball_weights(const Sample& s, double eta) {
  const int d = s.manifold().intrinsic_dim();
  const double ball = d == 1 ? 2.0 * eta : kPi * eta * eta;
  const double r2 = eta * eta;
  const auto& p = s.points();
  Vector w(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Eigen::Index count = 0;
    for (Eigen::Index j = 0; j < s.size(); ++j)
      if ((p.row(i) - p.row(j)).squaredNorm() <= r2) ++count;
    if (count == 0) throw Error(Errc::empty_ball, "no sample point within the ball");
    w(i) = ball / static_cast<double>(count);
  }
  return w;
}

SpectralDecomposition w_normalize(const SpectralDecomposition& dec, const Sample& s, double eta) {
  if (dec.vectors.rows() != s.size()) throw Error(Errc::invalid_argument, "eigenvectors do not match the sample");
  const Vector w = ball_weights(s, eta);
  SpectralDecomposition out = dec;
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    NeumaierSum acc;
    for (Eigen::Index i = 0; i < w.size(); ++i) acc += w(i) * out.vectors(i, j) * out.vectors(i, j);
    out.vectors.col(j) /= std::sqrt(acc.value());
  }
  out.norm = EigenNorm::weighted;
  return out;
}

Vector hks_at_samples(const SpectralDecomposition& dec, double tau, int count) {
  if (!(tau > 0.0)) throw Error(Errc::range_error, "diffusion time must be positive");
  if (count < 1 || count > dec.values.size()) throw Error(Errc::invalid_argument, "not enough eigenpairs");
  Vector h = Vector::Zero(dec.vectors.rows());
  for (int j = 0; j < count; ++j) {
    const double decay = std::exp(-tau * std::max(dec.values(j), 0.0));
    h.array() += decay * dec.vectors.col(j).array().square();
  }
  return h;
}

double hks_extend(const Sample& s, const Vector& hks, const Vector& x, double eps) {
  return smooth_normalized(s, std::span<const double>(hks.data(), static_cast<std::size_t>(hks.size())), x,
                           Bandwidth(eps, s.manifold().intrinsic_dim()));
}

double true_hks_circle(double radius, double tau, double tol) {
  if (!(radius > 0.0) || !(tau > 0.0)) throw Error(Errc::range_error, "radius and diffusion time must be positive");
  double tail = 0.0;
  for (long k = 1;; ++k) {
    const double term = std::exp(-static_cast<double>(k * k) * tau / (radius * radius));
    if (term < tol) break;
    tail += term;
  }
  return 1.0 / (kTwoPi * radius) + tail / (kPi * radius);
}

bool hks_sample_size_advisory(Eigen::Index n, int dim, double eta) {
  const double nn = static_cast<double>(n);
  return std::pow(std::log(nn) / nn, 1.0 / (4.0 * dim + 13.0)) > eta;
}

void write_spectrum_csv(std::ostream& os, const SpectralDecomposition& dec) {
  os << "index,eigenvalue\n";
  for (Eigen::Index j = 0; j < dec.values.size(); ++j) {
    os << j << ',';
    write_g17(os, dec.values(j));
    os << '\n';
  }
}

void write_hks_csv(std::ostream& os, const Vector& hks) {
  os << "index,hks\n";
  for (Eigen::Index i = 0; i < hks.size(); ++i) {
    os << i << ',';
    write_g17(os, hks(i));
    os << '\n';
  }
}

}  // namespace mks
