#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mks/kernels.hpp"
#include "mks/sampling.hpp"

namespace mks {

// (f(x) − T̄_{n,√2ε}[f](x)) / ε², with fx = f(x).
double pointwise_laplacian(const Sample& s, std::span<const double> f, double fx, const Vector& x,
                           const Bandwidth& bw);

enum class AffinityKind { plain, reweighted };

// L = (I − D⁻¹A)/β² with A symmetric and D = diag(row sums of A). The dense
// matrix L is never stored; apply() and to_dense() produce it on demand.
struct GraphLaplacian {
  AffinityKind kind = AffinityKind::plain;
  Matrix affinity;
  Vector degree;
  double beta = 0.0;

  Eigen::Index size() const { return degree.size(); }
  Vector apply(const Vector& f) const;
  Matrix to_dense() const;
};

// A_ij = K_{√2ε}(‖X_i − X_j‖), β = ε.
GraphLaplacian build_rw_laplacian(const Sample& s, double eps);

// W_ij = K_{√2η}(‖X_i − X_j‖) / (q(X_i) q(X_j)), q(x) = Σ_k K_{√2η}(‖X_k − x‖),
// β = η. `q_out`, when given, receives q at the sample points.
GraphLaplacian build_reweighted_laplacian(const Sample& s, double eta, Vector* q_out = nullptr);

enum class EigenNorm { euclidean, weighted };

// Eigenvalues ascending; column j of `vectors` belongs to values(j).
struct SpectralDecomposition {
  Vector values;
  Matrix vectors;
  EigenNorm norm = EigenNorm::euclidean;
};

// The N smallest eigenpairs of L, from the N largest of the symmetric
// S = D^{−1/2} A D^{−1/2} (LAPACK dsyevr): μ = (1 − λ_S)/β², v = D^{−1/2}u
// rescaled to unit length. Each vector's largest-magnitude entry is positive.
SpectralDecomposition eigendecompose(const GraphLaplacian& L, int count);

// Weights w_i = |B^d_η| / N(i), N(i) the number of sample points within
// ambient distance η of X_i (X_i included), |B^d_η| the η-ball volume in R^d.
Vector ball_weights(const Sample& s, double eta);

// Rescales every vector to Σ w_i ν(i)² = 1.
SpectralDecomposition w_normalize(const SpectralDecomposition& dec, const Sample& s, double eta);

// Σ_{j<N} e^{−τ μ_j} ν_j(i)², with negative round-off eigenvalues taken as 0.
Vector hks_at_samples(const SpectralDecomposition& dec, double tau, int count);

// Normalized kernel smoothing of the sample HKS values.
double hks_extend(const Sample& s, const Vector& hks, const Vector& x, double eps);

// 1/(2πR) + (1/(πR)) Σ_{k≥1} e^{−k²τ/R²}, stopping once a term falls below tol.
double true_hks_circle(double radius, double tau, double tol = 1e-16);

// True when (log n / n)^{1/(4d+13)} exceeds η.
bool hks_sample_size_advisory(Eigen::Index n, int dim, double eta);

void write_spectrum_csv(std::ostream& os, const SpectralDecomposition& dec);
void write_hks_csv(std::ostream& os, const Vector& hks);

}  // namespace mks
