#pragma once

#include <vector>

#include "spindyn/curve.hpp"
#include "spindyn/noise.hpp"

namespace spindyn {

// Parameters of the dynamic resonance-counting transport model.
struct HoppingParams {
  double alpha = 5.0;       // survival-probability prefactor
  double beta = 1.0;        // resonance-window factor
  double kappa = 0.31;      // T_z scaling constant
  double density = 0.0142;  // areal spin density n, nm^-2
  double j0 = 326.7;        // nm^3/us
  double r0 = 2.0;          // exclusion radius, nm

  void validate() const;  // all positive
};

struct EffectiveDisorder {
  double w_e = 0.0;    // rad/us
  double tau_e = 0.0;  // us
};

// P_res(t) = 1 - exp(-(beta J0/r^3/W) t/tau) (1 - beta J0/r^3/W), clamped to
// [0, 1]. Requires the perturbative regime beta J0/r^3 <= W (RegimeError
// otherwise).
double pair_resonance_probability(double r, double t, double w, double tau,
                                  const HoppingParams& p);

// P(t) = exp(-Int_{r0}^{R(t)} 2 pi n r P_res dr), R(t) = (J0 t)^{1/3}; inside
// the integral P_res is clamped to [0,1] so the sub-r* region where the
// coupling exceeds W counts as always-resonant. Returns 1 when R(t) <= r0.
double survival_integral(double t, double w, double tau, const HoppingParams& p);

enum class SurvivalForm { PlusTau, LongTime };

// Closed forms: exp(-alpha (n^{3/2} beta J0/(W tau) (t+tau))^{2/3}) and the
// long-time variant with (t+tau) -> t.
double survival_closed(double t, double w, double tau, const HoppingParams& p,
                       SurvivalForm form = SurvivalForm::PlusTau);

// P(t)/P(0) for the PlusTau form (the LongTime form already starts at 1).
double survival_closed_renormalized(double t, double w, double tau,
                                    const HoppingParams& p,
                                    SurvivalForm form = SurvivalForm::PlusTau);

// Average of -log P_integral / (n^{3/2} beta J0/(W tau) (t+tau))^{2/3} over a
// log-spaced grid in [t_lo, t_hi]; the model's own prescription for alpha.
double calibrate_alpha(double w, double tau, const HoppingParams& p, double t_lo,
                       double t_hi, int n_pts = 25);

// W_e = sqrt(W^2 + J1^2); sqrt(1/tau_e) = (W sqrt(1/tau) + J1 sqrt(1/T_z))/W_e.
EffectiveDisorder effective_disorder(double w, double tau, double j1, double t_z);

// Solves T_z = kappa tau_e(T_z) W_e / J by damped fixed-point iteration
// (damping 0.5, start kappa tau W / J, relative tolerance 1e-6, cap 1000).
double predict_tz(double w, double tau, double j1, double j_mean, double kappa);

// Divides each curve's times by its tau_e * W_e; values untouched.
std::vector<DecayCurve> collapse_transform(const std::vector<DecayCurve>& curves,
                                           const std::vector<EffectiveDisorder>& disorder);

// Strong-drive effective disorder width W^2/(sqrt(2) Omega); omega must be > 0.
double w_eff_driven(double w, double omega);

// Dressed-state depolarization rate prefactor * gamma_e^2 * V(Omega); the
// golden-rule prefactor defaults to 1/2 and is configurable.
double t1rho_rate(double omega, const NoiseModel& m, double prefactor = 0.5,
                  const Constants& c = {});

}  // namespace spindyn
