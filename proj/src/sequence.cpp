#include "spindyn/sequence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spindyn/errors.hpp"
#include "spindyn/quadrature.hpp"

namespace spindyn {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* to_string(SequenceKind k) {
  switch (k) {
    case SequenceKind::Ramsey: return "ramsey";
    case SequenceKind::Echo: return "echo";
    case SequenceKind::XY4: return "xy4";
    case SequenceKind::MREV8InEcho: return "mrev8";
    case SequenceKind::DEER: return "deer";
    case SequenceKind::SpinLock: return "spinlock";
    case SequenceKind::FreeDecay: return "freedecay";
  }
  return "?";
}

void PulseSequence::validate() const {
  if (pi_time < 0.0) throw ConfigError("PulseSequence: pi_time must be >= 0");
  if (drive < 0.0) throw ConfigError("PulseSequence: drive must be >= 0");
}

double filter_function(SequenceKind k, double omega, double t) {
  if (t < 0.0) throw std::domain_error("filter_function: t must be >= 0");
  const double u = omega * t;
  switch (k) {
    case SequenceKind::Ramsey: {
      const double s = std::sin(u / 2.0);
      return 2.0 * s * s;
    }
    case SequenceKind::Echo: {
      const double s = std::sin(u / 4.0);
      return 8.0 * s * s * s * s;
    }
    case SequenceKind::XY4: {
      const double s = std::sin(u / 16.0);
      const double c = std::cos(3.0 * u / 16.0) + std::cos(5.0 * u / 16.0);
      const double s2 = s * s;
      return 128.0 * s2 * s2 * s2 * c * c;
    }
    case SequenceKind::MREV8InEcho: {
      const double a = 1.0 + 2.0 * std::cos(u / 12.0);
      const double b = std::sin(u / 12.0) - std::sin(u / 6.0);
      const double g = 3.0 - 4.0 * std::cos(u / 24.0) + 3.0 * std::cos(u / 12.0) -
                       2.0 * std::cos(u / 8.0) + std::cos(u / 6.0);
      const double b2 = b * b;
      return 16.0 * a * a * b2 * b2 * g;
    }
    default:
      throw std::invalid_argument(std::string("filter_function: no scalar filter for kind ") +
                                  to_string(k));
  }
}

double filter_over_omega_sq(SequenceKind k, double omega, double t) {
  if (omega == 0.0) {
    // F ~ u^2 only for Ramsey; the echo-type filters vanish faster
    return k == SequenceKind::Ramsey ? t * t / 2.0 : 0.0;
  }
  return filter_function(k, omega, t) / (omega * omega);
}

double chi_numeric(SequenceKind k, double t, const NoiseModel& m, const ChiOptions& opts) {
  if (t < 0.0) throw std::domain_error("chi_numeric: t must be >= 0");
  if (k != SequenceKind::Ramsey && k != SequenceKind::Echo && k != SequenceKind::XY4 &&
      k != SequenceKind::MREV8InEcho) {
    throw std::invalid_argument(std::string("chi_numeric: unsupported kind ") + to_string(k));
  }
  m.validate();
  if (t == 0.0 || m.w == 0.0) return 0.0;

  const double w2 = m.w * m.w;
  // the XY4/MREV filters carry a heavy oscillatory tail in F(u)/u^4; a u
  // cutoff of 20 truncates several percent of their t^3 coefficient
  const double ufac =
      (k == SequenceKind::XY4 || k == SequenceKind::MREV8InEcho) ? 120.0 : 20.0;
  double wcut = std::max(ufac / m.tau, ufac / t);
  if (m.omega_l > 0.0) wcut = std::max(wcut, 4.0 * m.omega_l);

  const auto integrand = [&](double omega) {
    const double lor = 1.0 / (omega * omega * m.tau * m.tau + 1.0);
    return filter_over_omega_sq(k, omega, t) * lor;
  };
  QuadratureOptions qopts;
  qopts.rel_tol = opts.rel_tol;
  qopts.max_depth = opts.max_depth;
  double chi = 2.0 * w2 * m.tau / kPi * adaptive_simpson(integrand, 0.0, wcut, qopts);

  if (m.omega_l > 0.0) {
    chi += (5.0 / 9.0) * w2 * filter_function(k, m.omega_l, t) / (m.omega_l * m.omega_l);
  }
  return chi;
}

namespace {

double larmor_chi(SequenceKind k, double t, const NoiseModel& m) {
  if (m.omega_l <= 0.0 || m.w == 0.0) return 0.0;
  const double r = m.w / m.omega_l;
  return (5.0 / 9.0) * r * r * filter_function(k, m.omega_l, t);
}

double slow_noise_chi(SequenceKind k, double t, const NoiseModel& m) {
  const double w2 = m.w * m.w;
  const double t3 = t * t * t;
  switch (k) {
    case SequenceKind::Ramsey:
      return 0.5 * w2 * t * t - w2 * t3 / (6.0 * m.tau);
    case SequenceKind::Echo:
      return w2 * t3 / (12.0 * m.tau);
    case SequenceKind::XY4:
      return 13.0 * w2 * t3 / (4500.0 * m.tau);
    case SequenceKind::MREV8InEcho:
      return 49.0 * w2 * t3 / (2592.0 * m.tau);
    default:
      throw std::invalid_argument(std::string("closed-form decay: unsupported kind ") +
                                  to_string(k));
  }
}

}  // namespace

double bath_decay_factor(SequenceKind k, double t, const NoiseModel& m) {
  if (t < 0.0) throw std::domain_error("bath_decay_factor: t must be >= 0");
  m.validate();
  return std::exp(-slow_noise_chi(k, t, m) - larmor_chi(k, t, m));
}

double closed_form_decay(SequenceKind k, double t, const NoiseModel& m,
                         double t2_dipolar, double detuning) {
  if (!(t2_dipolar > 0.0)) {
    throw std::domain_error("closed_form_decay: t2_dipolar must be positive (or infinite)");
  }
  double s = bath_decay_factor(k, t, m);
  const bool dipolar = k == SequenceKind::Ramsey || k == SequenceKind::Echo ||
                       k == SequenceKind::XY4;  // MREV-8 decouples dipolar couplings
  if (dipolar && std::isfinite(t2_dipolar)) {
    const double x = t / t2_dipolar;
    s *= std::exp(-x * x);
  }
  if (k == SequenceKind::Ramsey) s *= std::cos(detuning * t);
  return s;
}

bool closed_form_in_validity(SequenceKind k, double t, const NoiseModel& m) {
  if (k == SequenceKind::Ramsey) return t <= m.tau;
  return true;
}

double two_spin_signal(double j1, double t) {
  if (t < 0.0) throw std::domain_error("two_spin_signal: t must be >= 0");
  return 0.5 * (std::cos(3.0 * j1 * t / 4.0) + std::cos(j1 * t / 4.0));
}

double deer_signal(std::span<const double> couplings, double t) {
  if (t < 0.0) throw std::domain_error("deer_signal: t must be >= 0");
  double prod = 1.0;
  for (double k : couplings) prod *= std::cos(k * t / 2.0);
  return 0.5 * (1.0 + prod);
}

int pi_equivalents(SequenceKind k) {
  switch (k) {
    case SequenceKind::Ramsey: return 1;       // two pi/2
    case SequenceKind::Echo: return 2;         // two pi/2 + pi
    case SequenceKind::XY4: return 5;          // two pi/2 + 4 pi
    case SequenceKind::MREV8InEcho: return 10; // 16 pi/2 + echo wrapper
    default:
      throw std::invalid_argument(std::string("pi_equivalents: unsupported kind ") +
                                  to_string(k));
  }
}

double finite_pulse_time(SequenceKind k, double free_time, double pi_time) {
  return finite_pulse_time(pi_equivalents(k), free_time, pi_time);
}

double finite_pulse_time(int pi_equiv, double free_time, double pi_time) {
  if (free_time < 0.0 || pi_time < 0.0 || pi_equiv < 0) {
    throw std::domain_error("finite_pulse_time: inputs must be >= 0");
  }
  return free_time + static_cast<double>(pi_equiv) * pi_time;
}

}  // namespace spindyn
