#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mks/config.hpp"
#include "mks/errors.hpp"

using namespace mks;

namespace {

Errc code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config was accepted");
  return Errc::invalid_argument;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const ExperimentConfig c = parse_config("[experiment]\nkind = berry_circle\n");
  CHECK(c.replicates == 300);
  CHECK(c.radius == 5.0);
  CHECK(c.n == std::vector<long>{500, 2000, 10000});
  CHECK(c.points.size() == 2);
  CHECK(c.bandwidth.scale == 1.0);
  CHECK_FALSE(c.bandwidth.exponent.has_value());
  // ε = n^{-1/(d+1)}
  CHECK(c.bandwidth.eps_for(10000, 1) == doctest::Approx(0.01));
  CHECK(c.bandwidth.eps_for(1000, 2) == doctest::Approx(0.1));

  const ExperimentConfig t = parse_config("[experiment]\nkind = berry_torus\n");
  CHECK(t.manifold == ManifoldKind::torus);
  CHECK(t.major == 0.5);
  CHECK(t.minor == doctest::Approx(1.0 / 3.0));
  CHECK(t.density.kind == DensityKind::vonmises_sine);
  CHECK(t.density.kappa1 == 1.0);
  CHECK(t.function == "torus_test");
}

TEST_CASE("violations are reported with the field") {
  const std::string neg = "[experiment]\nkind = berry_circle\n[estimator]\nn = 500, -3\n";
  CHECK(code_of(neg) == Errc::range_error);
  CHECK(message_of(neg).find("estimator.n") != std::string::npos);

  CHECK(code_of("[experiment]\nkind = berry_circle\ncolour = red\n") == Errc::schema_error);
  CHECK(code_of("[experiment]\nkind = berry_circle\n[extras]\nx = 1\n") == Errc::schema_error);
  CHECK(code_of("[experiment]\nkind = berry_circle\nseed = -4\n") == Errc::schema_error);
  CHECK(code_of("[experiment]\nkind = warp\n") == Errc::schema_error);
  CHECK(code_of("[experiment]\nkind = berry_circle\nreplicates = 10\n") == Errc::range_error);
  CHECK(code_of("[experiment]\nkind = berry_circle\n[manifold]\nradius = 0\n") == Errc::range_error);
  CHECK(code_of("[experiment]\nkind = berry_torus\n[manifold]\nmajor = 0.2\nminor = 0.3\n") == Errc::range_error);

  // both kinds present: schema wins, every violation listed
  const std::string both = "[experiment]\nkind = berry_circle\nreplicates = 2\nbogus = 1\n";
  CHECK(code_of(both) == Errc::schema_error);
  const std::string msg = message_of(both);
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(msg.find("replicates") != std::string::npos);
}

TEST_CASE("round trip through the canonical text") {
  for (const char* name : {"berry_circle", "berry_torus", "critical", "rates", "laplacian", "hks", "regression"}) {
    const std::string text = read_file(std::string(MKS_CONFIG_DIR) + "/" + name + ".ini");
    REQUIRE(!text.empty());
    const ExperimentConfig c = parse_config(text);
    const ExperimentConfig r = parse_config(serialize_config(c));
    CHECK(r == c);
    CHECK(config_hash(r) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
  }
  ExperimentConfig a = parse_config("[experiment]\nkind = rates\n");
  ExperimentConfig b = a;
  b.seed += 1;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("point lists and angles") {
  const ExperimentConfig c =
      parse_config("[experiment]\nkind = berry_torus\n[estimator]\npoints = 0, pi; 3pi/2, pi/2; -pi/2, 0.25\n");
  REQUIRE(c.points.size() == 3);
  const Vector p = resolve_point(c, c.points[1]);
  CHECK(p(0) == doctest::Approx(1.5 * kPi));
  CHECK(p(1) == doctest::Approx(0.5 * kPi));
  const Vector x = c.make_manifold().chart_embed(resolve_point(c, c.points[0]));
  CHECK(x(0) == doctest::Approx(1.0 / 6.0));

  CHECK(parse_angle("pi") == doctest::Approx(kPi));
  CHECK(parse_angle("-pi/2") == doctest::Approx(-kPi / 2));
  CHECK(parse_angle("3pi/2") == doctest::Approx(1.5 * kPi));
  CHECK(parse_angle("1.5") == 1.5);
  CHECK(parse_angle("2*pi") == doctest::Approx(kTwoPi));
  CHECK_THROWS_AS(parse_angle("pie"), Error);
  CHECK_THROWS_AS(parse_angle("pi/0"), Error);

  const ExperimentConfig crit = parse_config(read_file(std::string(MKS_CONFIG_DIR) + "/critical.ini"));
  CHECK(resolve_point(crit, "critical:1")(0) == doctest::Approx(1.27496).epsilon(1e-5));
  CHECK(code_of("[experiment]\nkind = berry_circle\n[estimator]\npoints = critical:99\n") == Errc::range_error);
  CHECK(code_of("[experiment]\nkind = berry_circle\n[estimator]\npoints = 0, 1\n") == Errc::range_error);
}

TEST_CASE("kappa3 default is announced") {
  std::vector<std::string> warnings;
  parse_config("[experiment]\nkind = berry_torus\n[density]\nkind = vonmises_sine\nkappa1 = 2\n", &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("kappa3") != std::string::npos);
}
