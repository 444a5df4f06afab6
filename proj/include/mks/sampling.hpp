#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mks/fields.hpp"
#include "mks/geometry.hpp"

namespace mks {

// SplitMix64 output function: one step of Steele/Lea/Flood's generator.
std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256** 1.0 (Blackman & Vigna). The four state words are filled by four
// successive splitmix64 draws starting from the seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  // (next() >> 11) · 2⁻⁵³, uniform on [0, 1).
  double uniform();
  // Box–Muller: u1 = 1 − uniform(), u2 = uniform(); returns
  // sqrt(−2 ln u1)·cos(2π u2). One normal per two uniforms, no caching.
  double normal();

private:
  std::uint64_t s_[4];
};

// Seed for replicate k: splitmix64 applied to root + (k + 1)·0x9E3779B97F4A7C15.
// The additive step is odd so distinct k map to distinct inputs, and the
// splitmix64 finalizer is a bijection, so outputs never collide for
// k < 2⁶⁴.
std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t replicate_index);

struct SampleMeta {
  std::string sampler;
  DensitySpec density;
  std::uint64_t seed = 0;
  // Rejection proposals drawn (von Mises sampler only).
  std::uint64_t proposals = 0;
};

// n i.i.d. points on a manifold with the chart angles they came from, plus
// optional regression responses.
class Sample {
public:
  using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Sample(Manifold manifold, PointMatrix points, PointMatrix chart, SampleMeta meta);

  const Manifold& manifold() const { return manifold_; }
  Eigen::Index size() const { return points_.rows(); }
  const PointMatrix& points() const { return points_; }
  const PointMatrix& chart() const { return chart_; }
  Vector point(Eigen::Index i) const { return points_.row(i).transpose(); }
  const SampleMeta& meta() const { return meta_; }

  bool has_responses() const { return y_.has_value(); }
  const Vector& responses() const;
  void set_responses(Vector y);

  // Header x1..xD,theta1..thetad[,y]; values printed with 17 significant digits.
  void write_csv(std::ostream& os) const;

private:
  Manifold manifold_;
  PointMatrix points_;
  PointMatrix chart_;
  std::optional<Vector> y_;
  SampleMeta meta_;
};

// Uniform with respect to the volume measure. Circle: θ ~ U[0, 2π). Torus:
// θ₁ uniform, θ₂ by rejection against the envelope (R + r cos θ₂)/(R + r).
Sample sample_uniform(const Manifold& m, Eigen::Index n, std::uint64_t seed);

// Bivariate von Mises sine model on the torus angles, by rejection from the
// uniform proposal on [0, 2π)² with envelope exp(|κ₁| + |κ₂| + |κ₃|). The
// density is over dθ, not the volume measure. Throws SamplerStalled after
// 10⁶·n proposals.
Sample sample_vonmises_sine(const Manifold& m, const DensitySpec& spec, Eigen::Index n, std::uint64_t seed);

// Dispatches on the density kind.
Sample sample_density(const Manifold& m, const DensitySpec& spec, Eigen::Index n, std::uint64_t seed);

struct RegressionSpec {
  std::string g = "cos_theta";
  double noise_sd = 0.0;
  double clip = 1e300;
};

// y_i = clamp(g(X_i) + ξ_i, ±C_Y) with ξ_i ~ N(0, noise_sd²).
Sample attach_regression(Sample s, const RegressionSpec& spec, std::uint64_t seed);

}  // namespace mks
