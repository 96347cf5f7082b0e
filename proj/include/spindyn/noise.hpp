#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spindyn/constants.hpp"

namespace spindyn {

// On-site disorder parameters defining the bath power spectrum: a Lorentzian
// of strength W at zero frequency plus a 5/9-weighted Lorentzian at the
// proton Larmor frequency omega_l, both with correlation time tau.
//
// Convention: omega_l == 0 means "no Larmor component" in time-domain
// generation, sequence responses and closed-form decays. spectral_density
// always evaluates the literal two-Lorentzian expression.
struct NoiseModel {
  double w = 0.0;        // disorder width, rad/us
  double tau = 1.0;      // correlation time, us
  double omega_l = 0.0;  // proton Larmor angular frequency, rad/us

  void validate() const;  // throws ConfigError
};

// V(omega) = 2 (W/gamma_e)^2 [ tau/(w^2 tau^2+1) + (5/9) tau/((w-wL)^2 tau^2+1) ],
// in G^2 us. One-sided in the Larmor term, exactly as written.
double spectral_density(const NoiseModel& m, double omega, const Constants& c = {});

enum class LayerKind { TwoDLayer, HalfSpace };
enum class FieldComponent { Longitudinal, Transverse };

// Proton layer geometry for B_rms calculations. proton_density is nm^-2 for
// TwoDLayer and nm^-3 for HalfSpace.
struct LayerGeometry {
  LayerKind kind = LayerKind::TwoDLayer;
  double depth = 1.0;           // nm
  double proton_density = 1.0;  // nm^-2 or nm^-3
  double spin_quantum = 0.5;

  void validate() const;
};

// Closed-form mean-square field (G^2):
//   TwoDLayer:  par 3*pi/(8 d^4) * rho * m^2,  perp 5*pi/(24 d^4) * rho * m^2
//   HalfSpace:  par pi/(8 d^3) * rho * m^2,    perp 5*pi/(72 d^3) * rho * m^2
// with m = gamma_n * hbar * sqrt(S(S+1)).
double brms_squared(const LayerGeometry& g, FieldComponent comp, const Constants& c = {});

struct DepthOptions {
  double max_depth = 1e4;  // nm
};

// Inverts brms_squared for the depth. Throws std::domain_error for
// non-positive brms and NumericError when the root exceeds max_depth.
double depth_from_brms(double brms_gauss, LayerKind kind, double proton_density,
                       FieldComponent comp, double spin_quantum = 0.5,
                       const Constants& c = {}, const DepthOptions& opts = {});

// On-site detuning trajectory delta(t) = gamma_e B_z(t), rad/us, sampled on a
// uniform grid.
struct NoiseTrajectory {
  double dt = 0.0;              // us
  std::vector<double> samples;  // rad/us
  std::uint64_t seed = 0;

  double duration() const {
    return samples.size() < 2 ? 0.0 : dt * static_cast<double>(samples.size() - 1);
  }
};

// delta(t) = x(t) + a(t) cos(omega_l t + phi): x is an Ornstein-Uhlenbeck
// process with stationary variance W^2 and correlation time tau; a is an
// independent OU envelope with variance (10/9) W^2 (so the Larmor component
// carries total variance (5/9) W^2 after phase averaging); phi is uniform.
// Exact OU update per step, stationary start; deterministic for fixed seed.
// Resolution guard: dt <= tau/10 and dt <= 2*pi/(10*max(omega_l, W)).
NoiseTrajectory generate_trajectory(const NoiseModel& m, double dt, double duration,
                                    std::uint64_t seed);

// CSV with header "time_us,delta_rad_per_us".
void write_trajectory_csv(const std::string& path, const NoiseTrajectory& traj);

}  // namespace spindyn
