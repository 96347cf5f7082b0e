#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "spindyn/constants.hpp"
#include "spindyn/curve.hpp"
#include "spindyn/errors.hpp"
#include "spindyn/geometry.hpp"
#include "spindyn/json_io.hpp"
#include "spindyn/rng.hpp"

using namespace spindyn;

TEST_CASE("constants match the quoted values") {
  Constants c;
  CHECK(std::abs(c.gamma_e / (2.0 * M_PI * 2.80) - 1.0) < 1e-3);
  CHECK(std::abs(c.j0 / 326.7 - 1.0) < 5e-3);
  // j0 consistent with hbar * gamma_e^2 at the quoted precision
  CHECK(std::abs(c.hbar * c.gamma_e * c.gamma_e / c.j0 - 1.0) < 5e-3);
}

TEST_CASE("coupling_strength closed form") {
  CHECK(coupling_strength(5.0, kMagicAngle) == doctest::Approx(0.0).epsilon(1e-12));

  const double expected = 326.7 / (8.4 * 8.4 * 8.4);
  CHECK(coupling_strength(8.4, M_PI / 2.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.551).epsilon(1e-3));

  CHECK(coupling_strength(8.4, 0.0) == doctest::Approx(-2.0 * expected).epsilon(1e-12));

  CHECK_THROWS_AS(coupling_strength(0.0, 0.3), std::domain_error);
  CHECK_THROWS_AS(coupling_strength(-1.0, 0.3), std::domain_error);
}

TEST_CASE("coupling_strength scaling and sign pattern") {
  for (double r : {2.0, 5.0, 11.0}) {
    for (double th : {0.1, 0.7, 1.2, 2.0}) {
      CHECK(coupling_strength(2.0 * r, th) ==
            doctest::Approx(coupling_strength(r, th) / 8.0).epsilon(1e-14));
    }
  }
  for (int i = 0; i <= 60; ++i) {
    const double th = i * M_PI / 60.0;
    const double v = coupling_strength(5.0, th);
    const bool inside = th > kMagicAngle && th < M_PI - kMagicAngle;
    if (std::abs(th - kMagicAngle) < 1e-9 || std::abs(M_PI - th - kMagicAngle) < 1e-9) continue;
    CHECK((inside ? v > 0.0 : v < 0.0));
  }
}

TEST_CASE("sample_ensemble determinism and constraints") {
  const double density = 1.0 / (8.4 * 8.4);
  const auto a = sample_ensemble(density, 5, 2.0, 1234);
  const auto b = sample_ensemble(density, 5, 2.0, 1234);
  REQUIRE(a.positions.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.positions[i][0] == b.positions[i][0]);
    CHECK(a.positions[i][1] == b.positions[i][1]);
  }
  const auto c = sample_ensemble(density, 5, 2.0, 99);
  bool any_diff = false;
  for (std::size_t i = 0; i < 5; ++i) {
    if (c.positions[i][0] != a.positions[i][0]) any_diff = true;
  }
  CHECK(any_diff);

  for (const auto& p : a.positions) {
    CHECK(std::hypot(p[0], p[1]) >= 2.0);
  }

  SampleOptions opts;
  opts.max_radius = 10.0;
  CHECK_THROWS_AS(sample_ensemble(density, 100000, 2.0, 1, opts), ConfigError);
}

TEST_CASE("sample_ensemble nearest-neighbor statistics match 2D Poisson") {
  const double n = 0.0142;  // nm^-2
  const int count = 10000;
  const auto e = sample_ensemble(n, count, 2.0, 20240601);

  // mean nearest-neighbor distance 1/(2 sqrt(n)); per-point variance
  // (4-pi)/(4 pi n). Interior points only, to avoid edge bias.
  const double rmax = std::sqrt(2.0 * 2.0 + count / (M_PI * n));
  const double mean_expect = 0.5 / std::sqrt(n);
  const double margin = 4.0 * mean_expect;

  double sum = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    const auto& p = e.positions[i];
    if (std::hypot(p[0], p[1]) > rmax - margin) continue;
    double best = 1e300;
    for (std::size_t j = 0; j < e.positions.size(); ++j) {
      if (i == j) continue;
      const double d = std::hypot(p[0] - e.positions[j][0], p[1] - e.positions[j][1]);
      best = std::min(best, d);
    }
    sum += best;
    ++used;
  }
  REQUIRE(used > 1000);
  const double mean = sum / used;
  const double se = std::sqrt((4.0 - M_PI) / (4.0 * M_PI * n) / used);
  CHECK(std::abs(mean - mean_expect) < 3.0 * se);
}

TEST_CASE("ensemble couplings use the tilted axis geometry") {
  SpinEnsemble e;
  e.quantization_axis_tilt = kDefaultAxisTilt;
  e.positions = {{6.0, 0.0}, {0.0, 6.0}};
  const auto cs = ensemble_couplings(e);
  REQUIRE(cs.couplings.size() == 3);

  // bath spin along x: cos(theta) = sin(tilt) = sqrt(2/3)
  const double ct = std::sin(kDefaultAxisTilt);
  const double expected_x = 326.7 * (1.0 - 3.0 * ct * ct) / (6.0 * 6.0 * 6.0);
  CHECK(cs.couplings[pair_index(0, 1, 3)] == doctest::Approx(expected_x).epsilon(1e-12));

  // bath spin along y is perpendicular to the tilted axis
  const double expected_y = 326.7 / (6.0 * 6.0 * 6.0);
  CHECK(cs.couplings[pair_index(0, 2, 3)] == doctest::Approx(expected_y).epsilon(1e-12));
}

TEST_CASE("rng stream is reproducible and has sane moments") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng r(7);
  double m = 0.0, v = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    m += x;
    v += x * x;
  }
  m /= n;
  v = v / n - m * m;
  CHECK(std::abs(m) < 0.01);
  CHECK(std::abs(v - 1.0) < 0.02);
}

TEST_CASE("JSON schemas round-trip") {
  Constants c;
  c.j0 = 320.0;
  const auto c2 = constants_from_json(to_json(c));
  CHECK(c2.j0 == c.j0);
  CHECK(c2.gamma_e == c.gamma_e);
  CHECK(c2.gamma_n == c.gamma_n);
  CHECK(c2.hbar == c.hbar);

  NoiseModel m{4.4, 14.6, 19.5};
  const auto m2 = noise_model_from_json(to_json(m));
  CHECK(m2.w == m.w);
  CHECK(m2.tau == m.tau);
  CHECK(m2.omega_l == m.omega_l);
  CHECK_THROWS_AS(noise_model_from_json(nlohmann::json{{"w", 1.0}}), DataError);

  const auto e = sample_ensemble(0.0142, 4, 2.0, 77);
  const auto e2 = ensemble_from_json(to_json(e));
  REQUIRE(e2.positions.size() == e.positions.size());
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    CHECK(e2.positions[i][0] == e.positions[i][0]);
    CHECK(e2.positions[i][1] == e.positions[i][1]);
  }
  CHECK(e2.density == e.density);
  CHECK(e2.min_radius == e.min_radius);
  CHECK(e2.seed == e.seed);
}

TEST_CASE("decay curve CSV roundtrip and validation") {
  DecayCurve c;
  c.times = {0.0, 0.5, 1.25};
  c.values = {1.0, 0.7, -0.2};
  c.sigmas = {0.01, 0.02, 0.03};

  const auto path = std::filesystem::temp_directory_path() / "spindyn_test_curve.csv";
  write_curve_csv(path.string(), c);
  const auto back = read_curve_csv(path.string());
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.times[i] == doctest::Approx(c.times[i]).epsilon(1e-12));
    CHECK(back.values[i] == doctest::Approx(c.values[i]).epsilon(1e-12));
    CHECK(back.sigmas[i] == doctest::Approx(c.sigmas[i]).epsilon(1e-12));
  }

  {
    std::ofstream out(path);
    out << "time_us,signal\n0.0,1.0\n0.5,0.9\n";
  }
  const auto nosig = read_curve_csv(path.string());
  CHECK(!nosig.has_sigmas());

  {
    std::ofstream out(path);
    out << "time_us,signal\n0.5,1.0\n0.4,0.9\n";  // non-increasing times
  }
  CHECK_THROWS_AS(read_curve_csv(path.string()), DataError);

  {
    std::ofstream out(path);
    out << "time_us,signal\n0.0,2.0\n";  // out of range
  }
  CHECK_THROWS_AS(read_curve_csv(path.string()), DataError);
  std::filesystem::remove(path);
}
