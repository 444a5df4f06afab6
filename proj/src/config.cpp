#include "mks/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mks/asymptotics.hpp"
#include "mks/errors.hpp"
#include "mks/fields.hpp"

namespace mks {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"experiment", {"kind", "seed", "replicates", "output"}},
      {"manifold", {"type", "radius", "major", "minor"}},
      {"density", {"kind", "mu1", "mu2", "kappa1", "kappa2", "kappa3"}},
      {"estimator",
       {"function", "points", "n", "bandwidth_scale", "bandwidth_exponent", "statistics", "grid_points", "quadrature"}},
      {"regression", {"noise_sd", "clip"}},
      {"hks", {"eta", "eigenpairs", "tau", "extend_eps", "extend_points"}},
      {"rates", {"eps"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_same_v<T, std::string>)
      out += xs[i];
    else if constexpr (std::is_floating_point_v<T>)
      out += g17(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

std::optional<ExperimentKind> kind_from(const std::string& s) {
  for (auto k : {ExperimentKind::berry_circle, ExperimentKind::berry_torus, ExperimentKind::rates,
                 ExperimentKind::laplacian, ExperimentKind::hks, ExperimentKind::regression})
    if (experiment_name(k) == s) return k;
  return std::nullopt;
}

ExperimentConfig defaults_for(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.statistics = {"unnormalized", "normalized"};
  c.tau = {0.5, 1.0};
  c.eps = {0.4, 0.2, 0.1, 0.05};
  switch (kind) {
    case ExperimentKind::berry_circle:
      c.radius = 5.0;
      c.function = "circle_test";
      c.points = {"0", "pi/2"};
      c.n = {500, 2000, 10000};
      break;
    case ExperimentKind::berry_torus:
      c.manifold = ManifoldKind::torus;
      c.density = DensitySpec::vonmises_sine(0.0, 0.0, 1.0, 1.0, 0.0);
      c.function = "torus_test";
      c.points = {"0,pi", "3pi/2,pi/2"};
      c.n = {500, 2000, 10000};
      break;
    case ExperimentKind::rates:
      c.radius = 1.0;
      c.function = "cos_theta";
      c.points = {"0", "pi/4", "pi/2", "3pi/4", "pi", "5pi/4", "3pi/2", "7pi/4"};
      c.n = {1};
      c.replicates = 1;
      break;
    case ExperimentKind::laplacian:
      c.radius = 1.0;
      c.function = "cos_theta";
      c.points = {"pi/4", "pi/2"};
      c.n = {5000};
      c.bandwidth = {0.1, 0.0};
      break;
    case ExperimentKind::hks:
      c.radius = 1.0;
      c.function = "one";
      c.points = {};
      c.n = {3000};
      c.replicates = 1;
      break;
    case ExperimentKind::regression:
      c.radius = 1.0;
      c.function = "cos_theta";
      c.points = {"pi/4"};
      c.n = {10000};
      break;
  }
  return c;
}

bool is_statistical(ExperimentKind k) {
  return k == ExperimentKind::berry_circle || k == ExperimentKind::berry_torus || k == ExperimentKind::laplacian ||
         k == ExperimentKind::regression;
}

}  // namespace

std::string_view experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::berry_circle: return "berry_circle";
    case ExperimentKind::berry_torus: return "berry_torus";
    case ExperimentKind::rates: return "rates";
    case ExperimentKind::laplacian: return "laplacian";
    case ExperimentKind::hks: return "hks";
    case ExperimentKind::regression: return "regression";
  }
  return "?";
}

double BandwidthRule::eps_for(double n, int dim) const {
  const double a = exponent.value_or(1.0 / (dim + 1.0));
  return scale * std::pow(n, -a);
}

Manifold ExperimentConfig::make_manifold() const {
  return manifold == ManifoldKind::circle ? Manifold::circle(radius) : Manifold::torus(major, minor);
}

double parse_angle(std::string_view token) {
  std::string t = trim(token);
  const auto bad = [&] { return Error(Errc::schema_error, "cannot read angle '" + std::string(token) + "'"); };
  const auto pi_at = t.find("pi");
  if (pi_at == std::string::npos) {
    if (auto v = to_double(t)) return *v;
    throw bad();
  }
  std::string coef = trim(t.substr(0, pi_at));
  std::string rest = trim(t.substr(pi_at + 2));
  if (!coef.empty() && coef.back() == '*') coef = trim(coef.substr(0, coef.size() - 1));
  double c = 1.0;
  if (coef == "-")
    c = -1.0;
  else if (!coef.empty() && coef != "+") {
    auto v = to_double(coef);
    if (!v) throw bad();
    c = *v;
  }
  double den = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw bad();
    auto v = to_double(trim(rest.substr(1)));
    if (!v || *v == 0.0) throw bad();
    den = *v;
  }
  return c * kPi / den;
}

Vector resolve_point(const ExperimentConfig& cfg, const std::string& spec) {
  const int d = cfg.dim();
  if (spec.rfind("critical:", 0) == 0) {
    if (cfg.manifold != ManifoldKind::circle || cfg.function != "circle_test")
      throw Error(Errc::range_error, "critical points are only known for circle_test on the circle");
    const auto k = to_int(trim(spec.substr(9)));
    const auto roots = circle_test_critical_angles(cfg.radius);
    if (!k || *k < 1 || *k > static_cast<long long>(roots.size()))
      throw Error(Errc::range_error, "critical point index out of range in '" + spec + "'");
    Vector t(1);
    t << roots[static_cast<std::size_t>(*k - 1)];
    return t;
  }
  const auto parts = split(spec, ',');
  if (static_cast<int>(parts.size()) != d)
    throw Error(Errc::range_error, "point '" + spec + "' needs " + std::to_string(d) + " angle(s)");
  Vector t(d);
  for (int i = 0; i < d; ++i) t(i) = wrap_angle(parse_angle(parts[static_cast<std::size_t>(i)]));
  return t;
}

ExperimentConfig parse_config(std::string_view text, std::vector<std::string>* warnings) {
  pt::ptree tree;
  {
    std::istringstream is{std::string(text)};
    try {
      pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
      throw Error(Errc::schema_error, std::string("malformed config: ") + e.message() + " (line " +
                                          std::to_string(e.line()) + ")");
    }
  }
  std::vector<std::string> schema_errs, range_errs;

  for (const auto& [section, body] : tree) {
    auto it = schema().find(section);
    if (it == schema().end()) {
      schema_errs.push_back("unknown section or top-level key '" + section + "'");
      continue;
    }
    for (const auto& [key, _] : body)
      if (!it->second.count(key)) schema_errs.push_back("unknown key '" + section + "." + key + "'");
  }

  auto get = [&](const char* section, const char* key) -> std::optional<std::string> {
    auto s = tree.get_child_optional(section);
    if (!s) return std::nullopt;
    auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  };

  const auto kind_text = get("experiment", "kind");
  ExperimentKind kind = ExperimentKind::berry_circle;
  if (!kind_text) {
    schema_errs.push_back("missing required key 'experiment.kind'");
  } else if (auto k = kind_from(*kind_text)) {
    kind = *k;
  } else {
    schema_errs.push_back("experiment.kind: unknown experiment '" + *kind_text + "'");
  }
  ExperimentConfig c = defaults_for(kind);

  auto read_double = [&](const char* sec, const char* key, double& out) {
    if (auto v = get(sec, key)) {
      if (auto d = to_double(*v))
        out = *d;
      else
        schema_errs.push_back(std::string(sec) + "." + key + ": expected a number, got '" + *v + "'");
    }
  };
  auto read_int = [&](const char* sec, const char* key, int& out) {
    if (auto v = get(sec, key)) {
      if (auto d = to_int(*v))
        out = static_cast<int>(*d);
      else
        schema_errs.push_back(std::string(sec) + "." + key + ": expected an integer, got '" + *v + "'");
    }
  };

  if (auto v = get("experiment", "seed")) {
    char* end = nullptr;
    const unsigned long long s = std::strtoull(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size() || v->front() == '-')
      schema_errs.push_back("experiment.seed: expected an unsigned integer, got '" + *v + "'");
    else
      c.seed = s;
  }
  read_int("experiment", "replicates", c.replicates);
  if (auto v = get("experiment", "output")) c.output = *v;

  if (auto v = get("manifold", "type")) {
    if (*v == "circle")
      c.manifold = ManifoldKind::circle;
    else if (*v == "torus")
      c.manifold = ManifoldKind::torus;
    else
      schema_errs.push_back("manifold.type: expected circle or torus, got '" + *v + "'");
  }
  read_double("manifold", "radius", c.radius);
  read_double("manifold", "major", c.major);
  read_double("manifold", "minor", c.minor);

  if (auto v = get("density", "kind")) {
    if (*v == "uniform")
      c.density = DensitySpec::uniform();
    else if (*v == "vonmises_sine")
      c.density.kind = DensityKind::vonmises_sine;
    else
      schema_errs.push_back("density.kind: expected uniform or vonmises_sine, got '" + *v + "'");
  }
  read_double("density", "mu1", c.density.mu1);
  read_double("density", "mu2", c.density.mu2);
  read_double("density", "kappa1", c.density.kappa1);
  read_double("density", "kappa2", c.density.kappa2);
  read_double("density", "kappa3", c.density.kappa3);
  if (c.density.kind == DensityKind::vonmises_sine && !get("density", "kappa3") && warnings)
    warnings->push_back("density.kappa3 not set; using 0");

  if (auto v = get("estimator", "function")) c.function = *v;
  if (auto v = get("estimator", "points")) c.points = v->empty() ? std::vector<std::string>{} : split(*v, ';');
  if (auto v = get("estimator", "n")) {
    c.n.clear();
    for (const auto& t : split(*v, ',')) {
      if (auto k = to_int(t))
        c.n.push_back(static_cast<long>(*k));
      else
        schema_errs.push_back("estimator.n: expected integers, got '" + t + "'");
    }
  }
  read_double("estimator", "bandwidth_scale", c.bandwidth.scale);
  if (auto v = get("estimator", "bandwidth_exponent")) {
    if (auto d = to_double(*v))
      c.bandwidth.exponent = *d;
    else
      schema_errs.push_back("estimator.bandwidth_exponent: expected a number, got '" + *v + "'");
  }
  if (auto v = get("estimator", "statistics")) c.statistics = split(*v, ',');
  read_int("estimator", "grid_points", c.grid_points);
  read_int("estimator", "quadrature", c.quadrature);

  read_double("regression", "noise_sd", c.noise_sd);
  read_double("regression", "clip", c.clip);

  read_double("hks", "eta", c.eta);
  read_int("hks", "eigenpairs", c.eigenpairs);
  auto read_list = [&](const char* sec, const char* key, std::vector<double>& out) {
    if (auto v = get(sec, key)) {
      out.clear();
      for (const auto& t : split(*v, ',')) {
        if (auto d = to_double(t))
          out.push_back(*d);
        else
          schema_errs.push_back(std::string(sec) + "." + key + ": expected numbers, got '" + t + "'");
      }
    }
  };
  read_list("hks", "tau", c.tau);
  read_double("hks", "extend_eps", c.extend_eps);
  read_int("hks", "extend_points", c.extend_points);
  read_list("rates", "eps", c.eps);

  try {
    ScalarField::from_id(c.function);
  } catch (const Error&) {
    schema_errs.push_back("estimator.function: unknown function '" + c.function + "'");
  }
  for (const auto& s : c.statistics)
    if (s != "unnormalized" && s != "normalized" && s != "critical")
      schema_errs.push_back("estimator.statistics: unknown statistic '" + s + "'");

  // Range checks.
  const int min_b = is_statistical(c.kind) ? 30 : 1;
  if (c.replicates < min_b)
    range_errs.push_back("experiment.replicates must be at least " + std::to_string(min_b));
  if (c.manifold == ManifoldKind::circle && !(c.radius > 0.0)) range_errs.push_back("manifold.radius must be > 0");
  if (c.manifold == ManifoldKind::torus && !(c.major > c.minor && c.minor > 0.0))
    range_errs.push_back("manifold.major and manifold.minor need major > minor > 0");
  if (c.kind == ExperimentKind::berry_circle && c.manifold != ManifoldKind::circle)
    range_errs.push_back("manifold.type must be circle for berry_circle");
  if (c.kind == ExperimentKind::berry_torus && c.manifold != ManifoldKind::torus)
    range_errs.push_back("manifold.type must be torus for berry_torus");
  if (c.density.kind == DensityKind::vonmises_sine && c.manifold != ManifoldKind::torus)
    range_errs.push_back("density.kind vonmises_sine requires manifold.type torus");
  if (c.n.empty()) range_errs.push_back("estimator.n must list at least one sample size");
  for (long v : c.n)
    if (v < (c.kind == ExperimentKind::hks ? 2 : 1)) range_errs.push_back("estimator.n must be positive, got " + std::to_string(v));
  if (!(c.bandwidth.scale > 0.0)) range_errs.push_back("estimator.bandwidth_scale must be > 0");
  if (c.bandwidth.exponent && !(*c.bandwidth.exponent >= 0.0))
    range_errs.push_back("estimator.bandwidth_exponent must be >= 0");
  if (c.grid_points < 1) range_errs.push_back("estimator.grid_points must be >= 1");
  if (c.quadrature != 0 && c.quadrature < 64) range_errs.push_back("estimator.quadrature must be 0 or >= 64");
  if (!(c.noise_sd >= 0.0)) range_errs.push_back("regression.noise_sd must be >= 0");
  if (!(c.clip > 0.0)) range_errs.push_back("regression.clip must be > 0");
  if (!(c.eta > 0.0)) range_errs.push_back("hks.eta must be > 0");
  if (c.eigenpairs < 1) range_errs.push_back("hks.eigenpairs must be >= 1");
  if (c.kind == ExperimentKind::hks)
    for (long v : c.n)
      if (v < c.eigenpairs) range_errs.push_back("hks.eigenpairs exceeds estimator.n");
  if (c.tau.empty()) range_errs.push_back("hks.tau must list at least one time");
  for (double t : c.tau)
    if (!(t > 0.0)) range_errs.push_back("hks.tau values must be > 0");
  if (!(c.extend_eps > 0.0)) range_errs.push_back("hks.extend_eps must be > 0");
  if (c.extend_points < 1) range_errs.push_back("hks.extend_points must be >= 1");
  if (c.kind == ExperimentKind::rates && c.eps.size() < 2) range_errs.push_back("rates.eps needs at least two values");
  for (double e : c.eps)
    if (!(e > 0.0)) range_errs.push_back("rates.eps values must be > 0");
  if (c.kind != ExperimentKind::hks && c.points.empty()) range_errs.push_back("estimator.points must not be empty");
  if (range_errs.empty() && schema_errs.empty()) {
    for (const auto& p : c.points) {
      try {
        resolve_point(c, p);
      } catch (const Error& e) {
        (e.code() == Errc::schema_error ? schema_errs : range_errs).push_back("estimator.points: " + std::string(e.what()));
      }
    }
  }

  if (!schema_errs.empty() || !range_errs.empty()) {
    std::string msg;
    for (const auto& e : schema_errs) msg += "\n  " + e;
    for (const auto& e : range_errs) msg += "\n  " + e;
    throw Error(schema_errs.empty() ? Errc::range_error : Errc::schema_error,
                std::to_string(schema_errs.size() + range_errs.size()) + " config violation(s):" + msg);
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[experiment]\n"
     << "kind = " << experiment_name(c.kind) << '\n'
     << "seed = " << c.seed << '\n'
     << "replicates = " << c.replicates << '\n'
     << "output = " << c.output << "\n\n";
  os << "[manifold]\n" << "type = " << (c.manifold == ManifoldKind::circle ? "circle" : "torus") << '\n';
  os << "radius = " << g17(c.radius) << '\n' << "major = " << g17(c.major) << '\n' << "minor = " << g17(c.minor) << "\n\n";
  os << "[density]\n" << "kind = " << (c.density.kind == DensityKind::uniform ? "uniform" : "vonmises_sine") << '\n'
     << "mu1 = " << g17(c.density.mu1) << '\n'
     << "mu2 = " << g17(c.density.mu2) << '\n'
     << "kappa1 = " << g17(c.density.kappa1) << '\n'
     << "kappa2 = " << g17(c.density.kappa2) << '\n'
     << "kappa3 = " << g17(c.density.kappa3) << "\n\n";
  os << "[estimator]\n"
     << "function = " << c.function << '\n'
     << "points = " << join(c.points, "; ") << '\n'
     << "n = " << join(c.n, ", ") << '\n'
     << "bandwidth_scale = " << g17(c.bandwidth.scale) << '\n';
  if (c.bandwidth.exponent) os << "bandwidth_exponent = " << g17(*c.bandwidth.exponent) << '\n';
  os << "statistics = " << join(c.statistics, ", ") << '\n'
     << "grid_points = " << c.grid_points << '\n'
     << "quadrature = " << c.quadrature << "\n\n";
  os << "[regression]\n" << "noise_sd = " << g17(c.noise_sd) << '\n' << "clip = " << g17(c.clip) << "\n\n";
  os << "[hks]\n"
     << "eta = " << g17(c.eta) << '\n'
     << "eigenpairs = " << c.eigenpairs << '\n'
     << "tau = " << join(c.tau, ", ") << '\n'
     << "extend_eps = " << g17(c.extend_eps) << '\n'
     << "extend_points = " << c.extend_points << "\n\n";
  os << "[rates]\n" << "eps = " << join(c.eps, ", ") << '\n';
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mks
