#include "spindyn/hopping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spindyn/errors.hpp"
#include "spindyn/quadrature.hpp"

namespace spindyn {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void HoppingParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(kappa > 0.0) || !(density > 0.0) ||
      !(j0 > 0.0) || !(r0 > 0.0)) {
    throw ConfigError("HoppingParams: all parameters must be positive");
  }
}

double pair_resonance_probability(double r, double t, double w, double tau,
                                  const HoppingParams& p) {
  p.validate();
  if (!(r > 0.0)) throw std::domain_error("pair_resonance_probability: r must be > 0");
  if (t < 0.0) throw std::domain_error("pair_resonance_probability: t must be >= 0");
  if (!(w > 0.0) || !(tau > 0.0)) {
    throw std::domain_error("pair_resonance_probability: w and tau must be > 0");
  }
  const double x = p.beta * p.j0 / (r * r * r * w);
  if (x > 1.0) {
    throw RegimeError(
        "pair_resonance_probability: beta*J0/r^3 = " + std::to_string(x * w) +
        " exceeds W = " + std::to_string(w) + "; increase r0 or W");
  }
  const double v = 1.0 - std::exp(-x * t / tau) * (1.0 - x);
  return std::clamp(v, 0.0, 1.0);
}

double survival_integral(double t, double w, double tau, const HoppingParams& p) {
  p.validate();
  if (t < 0.0) throw std::domain_error("survival_integral: t must be >= 0");
  if (!(w > 0.0) || !(tau > 0.0)) {
    throw std::domain_error("survival_integral: w and tau must be > 0");
  }
  const double rmax = std::cbrt(p.j0 * t);
  if (rmax <= p.r0) return 1.0;

  // inside r* = (beta J0/W)^{1/3} the coupling exceeds W and the clamped
  // P_res is exactly 1; split there so the quadrature sees a smooth integrand
  const double rstar = std::cbrt(p.beta * p.j0 / w);
  double neg_log = 0.0;
  double lo = p.r0;
  if (rstar > p.r0) {
    const double hi = std::min(rstar, rmax);
    neg_log += kPi * p.density * (hi * hi - p.r0 * p.r0);
    lo = hi;
  }
  if (lo < rmax) {
    const auto integrand = [&](double r) {
      const double x = p.beta * p.j0 / (r * r * r * w);
      const double pres = std::clamp(1.0 - std::exp(-x * t / tau) * (1.0 - x), 0.0, 1.0);
      return 2.0 * kPi * p.density * r * pres;
    };
    QuadratureOptions opts;
    opts.rel_tol = 1e-8;
    neg_log += adaptive_simpson(integrand, lo, rmax, opts);
  }
  return std::exp(-neg_log);
}

namespace {

double survival_exponent(double t_shifted, double w, double tau, const HoppingParams& p) {
  const double k = std::pow(p.density, 1.5) * p.beta * p.j0 / (w * tau);
  return p.alpha * std::pow(k * t_shifted, 2.0 / 3.0);
}

}  // namespace

double survival_closed(double t, double w, double tau, const HoppingParams& p,
                       SurvivalForm form) {
  p.validate();
  if (t < 0.0) throw std::domain_error("survival_closed: t must be >= 0");
  if (!(w > 0.0) || !(tau > 0.0)) {
    throw std::domain_error("survival_closed: w and tau must be > 0");
  }
  const double ts = form == SurvivalForm::PlusTau ? t + tau : t;
  return std::exp(-survival_exponent(ts, w, tau, p));
}

double survival_closed_renormalized(double t, double w, double tau,
                                    const HoppingParams& p, SurvivalForm form) {
  if (form == SurvivalForm::LongTime) return survival_closed(t, w, tau, p, form);
  const double e0 = survival_exponent(tau, w, tau, p);
  const double et = survival_exponent(t + tau, w, tau, p);
  return std::exp(-(et - e0));
}

double calibrate_alpha(double w, double tau, const HoppingParams& p, double t_lo,
                       double t_hi, int n_pts) {
  if (!(t_hi > t_lo) || !(t_lo > 0.0) || n_pts < 2) {
    throw ConfigError("calibrate_alpha: need 0 < t_lo < t_hi and n_pts >= 2");
  }
  double sum = 0.0;
  for (int i = 0; i < n_pts; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n_pts - 1));
    const double neg_log = -std::log(survival_integral(t, w, tau, p));
    const double k = std::pow(p.density, 1.5) * p.beta * p.j0 / (w * tau);
    const double p2 = std::pow(k * (t + tau), 2.0 / 3.0);
    sum += neg_log / p2;
  }
  return sum / n_pts;
}

EffectiveDisorder effective_disorder(double w, double tau, double j1, double t_z) {
  if (!(w > 0.0) || !(tau > 0.0)) {
    throw std::domain_error("effective_disorder: w and tau must be > 0");
  }
  if (j1 < 0.0) throw std::domain_error("effective_disorder: j1 must be >= 0");
  EffectiveDisorder d;
  d.w_e = std::hypot(w, j1);
  double inv_sqrt = w * std::sqrt(1.0 / tau);
  if (j1 > 0.0) {
    if (!(t_z > 0.0)) throw std::domain_error("effective_disorder: t_z must be > 0 when j1 > 0");
    inv_sqrt += j1 * std::sqrt(1.0 / t_z);
  }
  inv_sqrt /= d.w_e;
  d.tau_e = 1.0 / (inv_sqrt * inv_sqrt);
  return d;
}

double predict_tz(double w, double tau, double j1, double j_mean, double kappa) {
  if (!(w > 0.0) || !(tau > 0.0) || !(j_mean > 0.0) || !(kappa > 0.0) || j1 < 0.0) {
    throw std::domain_error("predict_tz: parameters must be positive (j1 >= 0)");
  }
  double tz = kappa * tau * w / j_mean;
  if (j1 == 0.0) return tz;
  const double damping = 0.5;
  for (int it = 0; it < 1000; ++it) {
    const EffectiveDisorder d = effective_disorder(w, tau, j1, tz);
    const double next = kappa * d.tau_e * d.w_e / j_mean;
    const double updated = (1.0 - damping) * tz + damping * next;
    const bool settled = std::abs(updated - tz) < 1e-9 * std::abs(updated);
    tz = updated;
    if (settled) {
      const EffectiveDisorder df = effective_disorder(w, tau, j1, tz);
      if (std::abs(tz - kappa * df.tau_e * df.w_e / j_mean) < 1e-6 * tz) return tz;
    }
  }
  throw NumericError("predict_tz: fixed point did not converge in 1000 iterations");
}

std::vector<DecayCurve> collapse_transform(const std::vector<DecayCurve>& curves,
                                           const std::vector<EffectiveDisorder>& disorder) {
  if (curves.size() != disorder.size()) {
    throw DataError("collapse_transform: curve/disorder list length mismatch");
  }
  std::vector<DecayCurve> out;
  out.reserve(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double scale = disorder[i].tau_e * disorder[i].w_e;
    if (!(scale > 0.0)) throw std::domain_error("collapse_transform: tau_e*W_e must be > 0");
    DecayCurve c = curves[i];
    for (double& t : c.times) t /= scale;
    out.push_back(std::move(c));
  }
  return out;
}

double w_eff_driven(double w, double omega) {
  if (!(omega > 0.0)) {
    throw std::domain_error("w_eff_driven: omega must be > 0 (strong-drive formula)");
  }
  if (w < 0.0) throw std::domain_error("w_eff_driven: w must be >= 0");
  return w * w / (std::sqrt(2.0) * omega);
}

double t1rho_rate(double omega, const NoiseModel& m, double prefactor, const Constants& c) {
  if (omega < 0.0) throw std::domain_error("t1rho_rate: omega must be >= 0");
  return prefactor * c.gamma_e * c.gamma_e * spectral_density(m, omega, c);
}

}  // namespace spindyn
