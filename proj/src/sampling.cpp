#include "mks/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mks/errors.hpp"

namespace mks {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

void write_g17(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t st = seed;
  for (auto& w : s_) w = splitmix64(st);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t replicate_index) {
  // splitmix64 pre-increments by kGolden, so start one step back.
  std::uint64_t st = root_seed + replicate_index * kGolden;
  return splitmix64(st);
}

Sample::Sample(Manifold manifold, PointMatrix points, PointMatrix chart, SampleMeta meta)
    : manifold_(manifold), points_(std::move(points)), chart_(std::move(chart)), meta_(std::move(meta)) {
  if (points_.rows() < 1) throw Error(Errc::empty_sample, "sample has no points");
  if (points_.cols() != manifold_.ambient_dim() || chart_.rows() != points_.rows() ||
      chart_.cols() != manifold_.intrinsic_dim())
    throw Error(Errc::invalid_argument, "sample arrays do not match the manifold dimensions");
}

const Vector& Sample::responses() const {
  if (!y_) throw Error(Errc::missing_responses, "sample carries no responses");
  return *y_;
}

void Sample::set_responses(Vector y) {
  if (y.size() != size()) throw Error(Errc::invalid_argument, "response length does not match sample size");
  y_ = std::move(y);
}

void Sample::write_csv(std::ostream& os) const {
  const int D = manifold_.ambient_dim(), d = manifold_.intrinsic_dim();
  for (int k = 0; k < D; ++k) os << (k ? "," : "") << 'x' << k + 1;
  for (int k = 0; k < d; ++k) os << ",theta" << k + 1;
  if (y_) os << ",y";
  os << '\n';
  for (Eigen::Index i = 0; i < size(); ++i) {
    for (int k = 0; k < D; ++k) {
      if (k) os << ',';
      write_g17(os, points_(i, k));
    }
    for (int k = 0; k < d; ++k) {
      os << ',';
      write_g17(os, chart_(i, k));
    }
    if (y_) {
      os << ',';
      write_g17(os, (*y_)(i));
    }
    os << '\n';
  }
}

namespace {

Sample assemble(const Manifold& m, Sample::PointMatrix chart, SampleMeta meta) {
  Sample::PointMatrix pts(chart.rows(), m.ambient_dim());
  for (Eigen::Index i = 0; i < chart.rows(); ++i) pts.row(i) = m.chart_embed(chart.row(i).transpose()).transpose();
  return Sample(m, std::move(pts), std::move(chart), std::move(meta));
}

void require_positive(Eigen::Index n) {
  if (n < 1) throw Error(Errc::empty_sample, "sample size must be at least 1");
}

}  // namespace

Sample sample_uniform(const Manifold& m, Eigen::Index n, std::uint64_t seed) {
  require_positive(n);
  Rng rng(seed);
  Sample::PointMatrix chart(n, m.intrinsic_dim());
  if (m.kind() == ManifoldKind::circle) {
    for (Eigen::Index i = 0; i < n; ++i) chart(i, 0) = kTwoPi * rng.uniform();
  } else {
    const double R = m.major_radius(), r = m.minor_radius();
    for (Eigen::Index i = 0; i < n; ++i) {
      chart(i, 0) = kTwoPi * rng.uniform();
      double t2;
      do {
        t2 = kTwoPi * rng.uniform();
      } while (rng.uniform() * (R + r) > R + r * std::cos(t2));
      chart(i, 1) = t2;
    }
  }
  return assemble(m, std::move(chart), {"uniform", DensitySpec::uniform(), seed});
}

Sample sample_vonmises_sine(const Manifold& m, const DensitySpec& spec, Eigen::Index n, std::uint64_t seed) {
  if (m.kind() != ManifoldKind::torus)
    throw Error(Errc::unsupported_manifold, "von Mises sine sampling needs the torus");
  require_positive(n);
  const double log_env = std::abs(spec.kappa1) + std::abs(spec.kappa2) + std::abs(spec.kappa3);
  const double cap = 1e6 * static_cast<double>(n);
  double proposals = 0.0;
  Rng rng(seed);
  Sample::PointMatrix chart(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (;;) {
      if (++proposals > cap) throw Error(Errc::sampler_stalled, "rejection cap of 1e6 proposals per point reached");
      const double t1 = kTwoPi * rng.uniform();
      const double t2 = kTwoPi * rng.uniform();
      const double a = t1 - spec.mu1, b = t2 - spec.mu2;
      const double lp = spec.kappa1 * std::cos(a) + spec.kappa2 * std::cos(b) + spec.kappa3 * std::sin(a) * std::sin(b);
      if (rng.uniform() < std::exp(lp - log_env)) {
        chart(i, 0) = t1;
        chart(i, 1) = t2;
        break;
      }
    }
  }
  return assemble(m, std::move(chart), {"vonmises_sine", spec, seed, static_cast<std::uint64_t>(proposals)});
}

Sample sample_density(const Manifold& m, const DensitySpec& spec, Eigen::Index n, std::uint64_t seed) {
  return spec.kind == DensityKind::uniform ? sample_uniform(m, n, seed) : sample_vonmises_sine(m, spec, n, seed);
}

Sample attach_regression(Sample s, const RegressionSpec& spec, std::uint64_t seed) {
  if (s.has_responses()) throw Error(Errc::invalid_argument, "sample already has responses");
  if (!(spec.noise_sd >= 0.0)) throw Error(Errc::range_error, "noise_sd must be nonnegative");
  if (!(spec.clip > 0.0)) throw Error(Errc::range_error, "clip must be positive");
  const ScalarField g = ScalarField::from_id(spec.g);
  Rng rng(seed);
  Vector y(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double v = g(s.point(i));
    if (spec.noise_sd > 0.0) v += spec.noise_sd * rng.normal();
    y(i) = std::clamp(v, -spec.clip, spec.clip);
  }
  s.set_responses(std::move(y));
  return s;
}

}  // namespace mks
