#include "spindyn/noise.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "spindyn/curve.hpp"
#include "spindyn/errors.hpp"
#include "spindyn/rng.hpp"

namespace spindyn {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void NoiseModel::validate() const {
  if (w < 0.0) throw ConfigError("NoiseModel: w must be >= 0");
  if (!(tau > 0.0)) throw ConfigError("NoiseModel: tau must be > 0");
  if (omega_l < 0.0) throw ConfigError("NoiseModel: omega_l must be >= 0");
}

double spectral_density(const NoiseModel& m, double omega, const Constants& c) {
  const double wsq = m.w * m.w / (c.gamma_e * c.gamma_e);
  const double x0 = omega * m.tau;
  const double xl = (omega - m.omega_l) * m.tau;
  return 2.0 * wsq * (m.tau / (x0 * x0 + 1.0) + (5.0 / 9.0) * m.tau / (xl * xl + 1.0));
}

void LayerGeometry::validate() const {
  if (!(depth > 0.0)) throw ConfigError("LayerGeometry: depth must be > 0");
  if (!(proton_density > 0.0)) throw ConfigError("LayerGeometry: proton_density must be > 0");
  if (!(spin_quantum > 0.0)) throw ConfigError("LayerGeometry: spin_quantum must be > 0");
}

namespace {

double geometry_prefactor(LayerKind kind, FieldComponent comp) {
  if (kind == LayerKind::TwoDLayer) {
    return comp == FieldComponent::Longitudinal ? 3.0 * kPi / 8.0 : 5.0 * kPi / 24.0;
  }
  return comp == FieldComponent::Longitudinal ? kPi / 8.0 : 5.0 * kPi / 72.0;
}

double moment_squared(double spin_quantum, const Constants& c) {
  const double m = c.gamma_n * c.hbar;
  return m * m * spin_quantum * (spin_quantum + 1.0);
}

}  // namespace

double brms_squared(const LayerGeometry& g, FieldComponent comp, const Constants& c) {
  g.validate();
  const double pre = geometry_prefactor(g.kind, comp);
  const int power = g.kind == LayerKind::TwoDLayer ? 4 : 3;
  return pre * g.proton_density * moment_squared(g.spin_quantum, c) /
         std::pow(g.depth, power);
}

double depth_from_brms(double brms_gauss, LayerKind kind, double proton_density,
                       FieldComponent comp, double spin_quantum, const Constants& c,
                       const DepthOptions& opts) {
  if (!(brms_gauss > 0.0)) {
    throw std::domain_error("depth_from_brms: brms must be positive");
  }
  if (!(proton_density > 0.0)) {
    throw std::domain_error("depth_from_brms: proton_density must be positive");
  }
  const double pre = geometry_prefactor(kind, comp);
  const double num = pre * proton_density * moment_squared(spin_quantum, c);
  const double bsq = brms_gauss * brms_gauss;
  const double d = kind == LayerKind::TwoDLayer ? std::pow(num / bsq, 0.25)
                                                : std::cbrt(num / bsq);
  if (!(d <= opts.max_depth)) {
    throw NumericError("depth_from_brms: depth " + std::to_string(d) +
                       " nm exceeds maximum " + std::to_string(opts.max_depth) + " nm");
  }
  return d;
}

NoiseTrajectory generate_trajectory(const NoiseModel& m, double dt, double duration,
                                    std::uint64_t seed) {
  m.validate();
  if (!(dt > 0.0) || !(duration >= 0.0)) {
    throw ConfigError("generate_trajectory: dt and duration must be positive");
  }
  if (dt > m.tau / 10.0) {
    throw ConfigError("generate_trajectory: dt must satisfy dt <= tau/10");
  }
  const double fmax = std::max(m.omega_l, m.w);
  if (fmax > 0.0 && dt > 2.0 * kPi / (10.0 * fmax)) {
    throw ConfigError("generate_trajectory: dt must satisfy dt <= 2*pi/(10*max(omega_l, w))");
  }

  const std::size_t n = static_cast<std::size_t>(std::ceil(duration / dt)) + 1;
  NoiseTrajectory traj;
  traj.dt = dt;
  traj.seed = seed;
  traj.samples.assign(n, 0.0);
  if (m.w == 0.0) return traj;

  Rng rng(seed);
  const double a = std::exp(-dt / m.tau);
  const double b = std::sqrt(1.0 - a * a);

  const double sigma_par = m.w;
  double x = sigma_par * rng.normal();

  const bool larmor = m.omega_l > 0.0;
  const double sigma_env = m.w * std::sqrt(10.0 / 9.0);
  double env = larmor ? sigma_env * rng.normal() : 0.0;
  const double phi = larmor ? 2.0 * kPi * rng.uniform() : 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    double v = x;
    if (larmor) v += env * std::cos(m.omega_l * (dt * static_cast<double>(k)) + phi);
    traj.samples[k] = v;
    x = a * x + b * sigma_par * rng.normal();
    if (larmor) env = a * env + b * sigma_env * rng.normal();
  }
  return traj;
}

void write_trajectory_csv(const std::string& path, const NoiseTrajectory& traj) {
  std::ostringstream out;
  out << "time_us,delta_rad_per_us\n";
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    out << format_double(traj.dt * static_cast<double>(k)) << ","
        << format_double(traj.samples[k]) << "\n";
  }
  write_text_atomic(path, out.str());
}

}  // namespace spindyn
