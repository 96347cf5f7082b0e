#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "spindyn/noise.hpp"
#include "spindyn/sequence.hpp"

using namespace spindyn;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

// exact OU dephasing exponents (zero-frequency Lorentzian only)
double chi_ou_ramsey(double w, double tau, double t) {
  const double x = t / tau;
  return w * w * tau * tau * (std::exp(-x) + x - 1.0);
}
double chi_ou_echo(double w, double tau, double t) {
  const double x = t / tau;
  return w * w * tau * tau * (x - 3.0 + 4.0 * std::exp(-x / 2.0) - std::exp(-x));
}
}  // namespace

TEST_CASE("filter function fixed points") {
  for (auto k : {SequenceKind::Ramsey, SequenceKind::Echo, SequenceKind::XY4,
                 SequenceKind::MREV8InEcho}) {
    CHECK(filter_function(k, 3.7, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
  }
  // Ramsey: F = 2 at wt = pi; Echo: F = 8 at wt = 2 pi
  CHECK(filter_function(SequenceKind::Ramsey, M_PI, 1.0) == doctest::Approx(2.0));
  CHECK(filter_function(SequenceKind::Echo, 2.0 * M_PI, 1.0) == doctest::Approx(8.0));

  CHECK_THROWS_AS(filter_function(SequenceKind::DEER, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(filter_function(SequenceKind::SpinLock, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(filter_function(SequenceKind::FreeDecay, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("filter/omega^2 has a finite omega->0 limit for echo-type kinds") {
  const double t = 2.31;
  for (auto k : {SequenceKind::Echo, SequenceKind::XY4, SequenceKind::MREV8InEcho}) {
    // the limit is zero (F vanishes faster than omega^2); series evaluation
    // at 1e-8 and 1e-6 agrees to 4 digits on the scale t^2 of the integrand
    const double a = filter_over_omega_sq(k, 1e-8, t);
    const double b = filter_over_omega_sq(k, 1e-6, t);
    CHECK(std::isfinite(a));
    CHECK(std::isfinite(b));
    CHECK(std::abs(a - b) <= 1e-4 * t * t);
  }
  // Ramsey limit t^2/2
  CHECK(filter_over_omega_sq(SequenceKind::Ramsey, 0.0, t) ==
        doctest::Approx(t * t / 2.0).epsilon(1e-12));
  CHECK(filter_over_omega_sq(SequenceKind::Ramsey, 1e-9, t) ==
        doctest::Approx(t * t / 2.0).epsilon(1e-6));
}

TEST_CASE("MREV filter is non-negative on a dense grid") {
  for (int i = 0; i <= 4000; ++i) {
    const double u = i * 0.05;
    CHECK(filter_function(SequenceKind::MREV8InEcho, u, 1.0) >= -1e-12);
  }
}

TEST_CASE("chi_numeric trivial and analytic OU oracles") {
  const NoiseModel m{4.40, 14.6, 0.0};
  for (auto k : {SequenceKind::Ramsey, SequenceKind::Echo, SequenceKind::XY4,
                 SequenceKind::MREV8InEcho}) {
    CHECK(chi_numeric(k, 0.0, m) == 0.0);
  }

  // numerical integral vs the exact OU expressions; tolerance set by the
  // frequency cutoff of the quadrature window
  for (double t : {0.3, 1.0, 5.0, 20.0, 40.0}) {
    CHECK(std::abs(chi_numeric(SequenceKind::Ramsey, t, m) / chi_ou_ramsey(m.w, m.tau, t) -
                   1.0) < 5e-3);
    CHECK(std::abs(chi_numeric(SequenceKind::Echo, t, m) / chi_ou_echo(m.w, m.tau, t) - 1.0) <
          5e-3);
  }
}

TEST_CASE("chi_numeric echo matches the small-t expansion") {
  const NoiseModel m{4.40, 14.6, 0.0};
  for (double t : {0.2, 0.35, 0.5}) {
    const double expect = m.w * m.w * t * t * t / (12.0 * m.tau);
    CHECK(std::abs(chi_numeric(SequenceKind::Echo, t, m) / expect - 1.0) < 0.02);
  }
}

TEST_CASE("chi_numeric small-t envelope coefficients per kind") {
  // chi ~ c W^2 t^3 / tau with c computed from the filter functions by an
  // independent radial integral (time-domain switching oracle agrees):
  // Echo 1/12, XY4 1/192, MREV 49/2592. The XY4 value differs from the
  // quoted closed-form envelope (13/4500); the filter function itself is the
  // authority here and both independent routes give 1/192.
  const NoiseModel m{2.0, 400.0, 0.0};
  const double t = 0.8;
  const double base = m.w * m.w * t * t * t / m.tau;
  CHECK(std::abs(chi_numeric(SequenceKind::Echo, t, m) / (base / 12.0) - 1.0) < 0.01);
  CHECK(std::abs(chi_numeric(SequenceKind::XY4, t, m) / (base / 192.0) - 1.0) < 0.01);
  CHECK(std::abs(chi_numeric(SequenceKind::MREV8InEcho, t, m) / (base * 49.0 / 2592.0) - 1.0) <
        0.01);

  // ratio of XY4 to echo exponents approaches (1/192)/(1/12) = 1/16
  const double ratio =
      chi_numeric(SequenceKind::XY4, t, m) / chi_numeric(SequenceKind::Echo, t, m);
  CHECK(std::abs(ratio / (1.0 / 16.0) - 1.0) < 0.01);
}

TEST_CASE("chi_numeric includes the Larmor delta term") {
  const NoiseModel m0{3.0, 20.0, 0.0};
  const NoiseModel ml{3.0, 20.0, 15.0};
  const double t = 1.2;
  for (auto k : {SequenceKind::Ramsey, SequenceKind::Echo, SequenceKind::XY4,
                 SequenceKind::MREV8InEcho}) {
    // the omega_l > 0 model also widens the quadrature window, so the match
    // is close but not exact
    const double delta = chi_numeric(k, t, ml) - chi_numeric(k, t, m0);
    const double expect =
        (5.0 / 9.0) * m0.w * m0.w * filter_function(k, ml.omega_l, t) /
        (ml.omega_l * ml.omega_l);
    CHECK(delta == doctest::Approx(expect).epsilon(0.01));
  }
}

TEST_CASE("closed form decay fixed points and bounds") {
  const NoiseModel m{4.40, 14.6, 2.0 * M_PI * 3.11};
  for (auto k : {SequenceKind::Ramsey, SequenceKind::Echo, SequenceKind::XY4,
                 SequenceKind::MREV8InEcho}) {
    CHECK(closed_form_decay(k, 0.0, m, 1.41) == doctest::Approx(1.0));
  }
  // |signal| <= 1 within the validity regime t <= tau
  for (auto k : {SequenceKind::Ramsey, SequenceKind::Echo, SequenceKind::XY4,
                 SequenceKind::MREV8InEcho}) {
    for (int i = 0; i <= 100; ++i) {
      const double t = m.tau * i / 100.0;
      CHECK(std::abs(closed_form_decay(k, t, m, 1.41, 3.0)) <= 1.0 + 1e-12);
    }
  }
  CHECK(closed_form_in_validity(SequenceKind::Ramsey, 0.9 * m.tau, m));
  CHECK(!closed_form_in_validity(SequenceKind::Ramsey, 1.1 * m.tau, m));
  CHECK(closed_form_in_validity(SequenceKind::Echo, 10.0 * m.tau, m));
}

TEST_CASE("Ramsey closed form reproduces the quoted T2*") {
  // bath-only mode: no dipolar factor, slow bath, no Larmor term
  const NoiseModel m{4.40, 1e9, 0.0};
  const double t1e = std::sqrt(2.0) / m.w;
  CHECK(closed_form_decay(SequenceKind::Ramsey, t1e, m, kInf) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(t1e == doctest::Approx(0.321).epsilon(2e-3));
  CHECK(t1e > 0.30);
  CHECK(t1e < 0.34);
}

TEST_CASE("echo Larmor modulation minima at odd multiples of the Larmor period") {
  const NoiseModel m{4.40, 1e9, 2.0 * M_PI * 3.11};
  // factor exp(-(40 W^2 / 9 wL^2) sin^4(wL t/4)) minimized at wL t = 2pi(2k+1)
  const auto factor = [&](double t) {
    return std::exp(-(40.0 * m.w * m.w / (9.0 * m.omega_l * m.omega_l)) *
                    std::pow(std::sin(m.omega_l * t / 4.0), 4));
  };
  for (int k = 0; k < 3; ++k) {
    const double tmin = 2.0 * M_PI * (2 * k + 1) / m.omega_l;
    const double eps = 0.02 * 2.0 * M_PI / m.omega_l;
    CHECK(factor(tmin) < factor(tmin - eps));
    CHECK(factor(tmin) < factor(tmin + eps));
  }
}

TEST_CASE("two spin signal") {
  CHECK(two_spin_signal(0.71, 0.0) == doctest::Approx(1.0));
  const double j1 = 0.9;
  CHECK(two_spin_signal(j1, 4.0 * M_PI / j1) == doctest::Approx(-1.0).epsilon(1e-12));

  // first zero by bisection equals the analytic root pi/J1 of
  // cos(3x/4) + cos(x/4) = 2 cos(x/2) cos(x/4)
  const double jr = 0.71;
  double lo = 3.0, hi = 5.0;
  REQUIRE(two_spin_signal(jr, lo) > 0.0);
  REQUIRE(two_spin_signal(jr, hi) < 0.0);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (two_spin_signal(jr, mid) > 0.0 ? lo : hi) = mid;
  }
  CHECK(0.5 * (lo + hi) == doctest::Approx(M_PI / jr).epsilon(1e-10));

  // period 8 pi / J1 exactly
  for (double t : {0.3, 1.7, 6.9}) {
    CHECK(two_spin_signal(jr, t + 8.0 * M_PI / jr) ==
          doctest::Approx(two_spin_signal(jr, t)).epsilon(1e-12));
  }
}

TEST_CASE("deer signal") {
  std::vector<double> none;
  CHECK(deer_signal(none, 3.0) == doctest::Approx(1.0));

  std::vector<double> kmax = {4.90};
  CHECK(deer_signal(kmax, 0.0) == doctest::Approx(1.0));
  // first zero of the cosine factor: the signal reaches 1/2 at t = pi/k
  CHECK(deer_signal(kmax, M_PI / 4.90) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(M_PI / 4.90 == doctest::Approx(0.641).epsilon(1e-3));

  // two equal couplings keep the signal >= 1/2
  std::vector<double> two = {2.2, 2.2};
  for (int i = 0; i <= 300; ++i) {
    const double v = deer_signal(two, i * 0.05);
    CHECK(v >= 0.5 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("finite pulse time accounting") {
  CHECK(finite_pulse_time(SequenceKind::Echo, 3.0, 0.0) == doctest::Approx(3.0));
  CHECK(finite_pulse_time(SequenceKind::MREV8InEcho, 2.0, 0.04) ==
        doctest::Approx(2.0 + 0.4).epsilon(1e-12));
  CHECK(finite_pulse_time(SequenceKind::XY4, 2.0, 0.04) ==
        doctest::Approx(2.0 + 0.2).epsilon(1e-12));
  CHECK(finite_pulse_time(SequenceKind::Ramsey, 2.0, 0.04) ==
        doctest::Approx(2.0 + 0.04).epsilon(1e-12));
  CHECK(finite_pulse_time(7, 1.0, 0.1) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("exp(-chi_numeric) matches the closed-form bath factor at small t") {
  // identical Larmor handling in both routes; the zero-frequency part agrees
  // to the small-t expansion accuracy
  const NoiseModel m{4.40, 14.6, 2.0 * M_PI * 3.11};
  const double t_hi = std::min(3.0 * m.tau, 3.0 / m.w);
  for (auto k : {SequenceKind::Echo, SequenceKind::MREV8InEcho}) {
    for (int i = 1; i <= 12; ++i) {
      const double t = t_hi * i / 12.0;
      const double numeric = std::exp(-chi_numeric(k, t, m));
      const double closed = bath_decay_factor(k, t, m);
      CHECK(std::abs(numeric / closed - 1.0) < 0.03);
    }
  }
}
