#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mks/geometry.hpp"

namespace mks {

enum class ExperimentKind { berry_circle, berry_torus, rates, laplacian, hks, regression };

std::string_view experiment_name(ExperimentKind kind);

// ε = scale · n^{−exponent}; the exponent defaults to 1/(d+1).
struct BandwidthRule {
  double scale = 1.0;
  std::optional<double> exponent;

  double eps_for(double n, int dim) const;
  friend bool operator==(const BandwidthRule&, const BandwidthRule&) = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::berry_circle;
  std::uint64_t seed = 1;
  int replicates = 300;
  std::string output = "results";

  ManifoldKind manifold = ManifoldKind::circle;
  double radius = 5.0;
  double major = 0.5;
  double minor = 1.0 / 3.0;

  DensitySpec density;

  std::string function = "circle_test";
  // Chart coordinates, one string per point: comma-separated angles, or
  // "critical:k" for the k-th (1-based) critical angle of the circle test
  // function.
  std::vector<std::string> points;
  std::vector<long> n;
  BandwidthRule bandwidth;
  std::vector<std::string> statistics;
  int grid_points = 64;
  int quadrature = 0;

  double noise_sd = 0.1;
  double clip = 1e6;

  double eta = 0.1;
  int eigenpairs = 20;
  std::vector<double> tau;
  double extend_eps = 0.1;
  int extend_points = 16;

  std::vector<double> eps;

  Manifold make_manifold() const;
  int dim() const { return manifold == ManifoldKind::circle ? 1 : 2; }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// INI text: sections [experiment], [manifold], [density], [estimator],
// [regression], [hks], [rates]. Unknown sections or keys are schema errors.
// Every violation is collected before throwing; SchemaError wins over
// RangeError when both occur. Notes about filled-in defaults the user may care
// about are appended to `warnings`.
ExperimentConfig parse_config(std::string_view text, std::vector<std::string>* warnings = nullptr);

// Canonical text with every field written out; parse_config reproduces the
// same config.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

// Resolves an angle such as "1.5", "pi", "-pi/2" or "3pi/2".
double parse_angle(std::string_view token);

// Chart coordinates for a point spec, using the config's manifold and test
// function for "critical:k".
Vector resolve_point(const ExperimentConfig& cfg, const std::string& spec);

}  // namespace mks
