#include "spindyn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spindyn/errors.hpp"
#include "spindyn/rng.hpp"
#include "spindyn/sequence.hpp"

namespace spindyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double chi2_statistic(const DecayCurve& data, std::span<const double> model,
                      std::vector<std::string>* warnings) {
  if (model.size() != data.values.size()) {
    throw DataError("chi2: model/data length mismatch");
  }
  const bool weighted = data.has_sigmas();
  if (!weighted && warnings) {
    warnings->push_back("no sigmas; unit weights used");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double s = weighted ? data.sigmas[i] : 1.0;
    if (!(s > 0.0)) throw DataError("chi2: non-positive sigma");
    const double r = (data.values[i] - model[i]) / s;
    sum += r * r;
  }
  return sum;
}

namespace {

void numeric_jacobian(const std::function<void(const VectorXd&, VectorXd&)>& resid,
                      const VectorXd& x, const VectorXd& r0, MatrixXd& jac) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(r0.size());
  jac.resize(m, n);
  VectorXd rp(m), rm(m), xt = x;
  for (int j = 0; j < n; ++j) {
    const double h = std::max(1e-7 * std::abs(x[j]), 1e-9);
    xt[j] = x[j] + h;
    resid(xt, rp);
    xt[j] = x[j] - h;
    resid(xt, rm);
    xt[j] = x[j];
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
}

}  // namespace

LmOutcome lm_fit(const std::function<void(const VectorXd&, VectorXd&)>& resid,
                 VectorXd x0, const LmOptions& opts, const VectorXd* lower,
                 const VectorXd* upper) {
  const auto project = [&](VectorXd& x) {
    if (lower)
      for (int i = 0; i < x.size(); ++i) x[i] = std::max(x[i], (*lower)[i]);
    if (upper)
      for (int i = 0; i < x.size(); ++i) x[i] = std::min(x[i], (*upper)[i]);
  };
  project(x0);

  VectorXd r;
  resid(x0, r);
  double chi2 = r.squaredNorm();
  double lambda = opts.lambda0;
  MatrixXd jac;

  LmOutcome out;
  out.x = x0;
  out.chi2 = chi2;

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    numeric_jacobian(resid, out.x, r, jac);
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd g = jac.transpose() * r;

    bool accepted = false;
    for (int tries = 0; tries < 24 && !accepted; ++tries) {
      MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const VectorXd step = a.ldlt().solve(g);
      VectorXd xn = out.x - step;
      project(xn);
      VectorXd rn;
      resid(xn, rn);
      const double cn = rn.squaredNorm();
      if (cn <= chi2) {
        const double rel_step = (xn - out.x).norm() / std::max(1e-30, out.x.norm());
        out.x = xn;
        r = rn;
        const double dchi = chi2 - cn;
        chi2 = cn;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel_step < opts.step_tol || dchi < 1e-14 * (1.0 + chi2)) {
          out.converged = true;
        }
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) {
      // no downhill step found at any damping; treat as converged-in-place
      out.converged = true;
    }
    if (out.converged) break;
  }
  out.n_iter = it + 1;
  out.chi2 = chi2;

  numeric_jacobian(resid, out.x, r, jac);
  const MatrixXd jtj = jac.transpose() * jac;
  Eigen::FullPivLU<MatrixXd> lu(jtj);
  if (lu.rank() < jtj.rows()) {
    out.rank_deficient = true;
    out.covariance = lu.inverse();  // pseudo-ish; flagged upstream
  } else {
    out.covariance = jtj.inverse();
  }
  return out;
}

namespace {

struct JointModel {
  const JointFitData* data;
  // x = (ln J1, ln W, ln tau, detuning)
  void operator()(const VectorXd& x, VectorXd& r) const {
    const double j1 = std::exp(x[0]);
    const double w = std::exp(x[1]);
    const double tau = std::exp(x[2]);
    const double det = x[3];
    NoiseModel m{w, tau, data->omega_l};
    const double t2 = 1.0 / j1;

    const std::size_t n = data->ramsey.size() + data->echo.size() + data->xy4.size() +
                          data->mrev8.size();
    r.resize(static_cast<Eigen::Index>(n));
    Eigen::Index k = 0;
    const auto add = [&](const DecayCurve& c, SequenceKind kind, double detuning) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double mval = closed_form_decay(kind, c.times[i], m, t2, detuning);
        const double s = c.has_sigmas() ? c.sigmas[i] : 1.0;
        r[k++] = (c.values[i] - mval) / s;
      }
    };
    add(data->ramsey, SequenceKind::Ramsey, det);
    add(data->echo, SequenceKind::Echo, 0.0);
    add(data->xy4, SequenceKind::XY4, 0.0);
    add(data->mrev8, SequenceKind::MREV8InEcho, 0.0);
  }
};

double init_or(const std::map<std::string, double>& init, const std::string& key,
               double fallback) {
  const auto it = init.find(key);
  return it == init.end() ? fallback : it->second;
}

}  // namespace

FitResult fit_joint(const JointFitData& data, const std::map<std::string, double>& init,
                    std::uint64_t seed, int multistart) {
  for (const DecayCurve* c : {&data.ramsey, &data.echo, &data.xy4, &data.mrev8}) {
    if (c->size() == 0) throw DataError("fit_joint: empty input curve");
    c->validate();
  }
  const double j1_0 = init_or(init, "j1", 0.71);
  const double w_0 = init_or(init, "w", 4.4);
  const double tau_0 = init_or(init, "tau", 14.6);
  const double det_0 = init_or(init, "detuning", 2.0 * 3.14159265358979323846 * 9.2);

  JointModel model{&data};
  const std::size_t n_pts =
      data.ramsey.size() + data.echo.size() + data.xy4.size() + data.mrev8.size();

  Rng rng(seed);
  LmOutcome best;
  best.chi2 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < std::max(1, multistart); ++s) {
    VectorXd x0(4);
    const double jit = s == 0 ? 0.0 : 0.2;
    x0 << std::log(j1_0) + jit * rng.normal(), std::log(w_0) + jit * rng.normal(),
        std::log(tau_0) + jit * rng.normal(), det_0 * (1.0 + 0.05 * (s == 0 ? 0.0 : rng.normal()));
    const LmOutcome out = lm_fit(model, x0);
    if (out.chi2 < best.chi2) best = out;
  }

  FitResult res;
  res.param_names = {"j1", "w", "tau", "detuning"};
  const double j1 = std::exp(best.x[0]);
  const double w = std::exp(best.x[1]);
  const double tau = std::exp(best.x[2]);
  res.params = {{"j1", j1}, {"w", w}, {"tau", tau}, {"detuning", best.x[3]}};
  res.chi2 = best.chi2;
  res.dof = static_cast<int>(n_pts) - 4;
  res.converged = best.converged;
  res.n_iter = best.n_iter;
  if (best.rank_deficient) res.warnings.push_back("rank-deficient Jacobian at optimum");

  // delta-method transform from (ln J1, ln W, ln tau, det); covariance scaled
  // by reduced chi^2
  MatrixXd d = MatrixXd::Identity(4, 4);
  d(0, 0) = j1;
  d(1, 1) = w;
  d(2, 2) = tau;
  const double scale = res.dof > 0 ? std::max(res.chi2 / res.dof, 0.0) : 1.0;
  res.covariance = d * best.covariance * d * scale;
  for (int i = 0; i < 4; ++i) {
    res.sigmas[res.param_names[i]] = std::sqrt(std::max(0.0, res.covariance(i, i)));
  }
  const bool any_sigmas = data.ramsey.has_sigmas() || data.echo.has_sigmas() ||
                          data.xy4.has_sigmas() || data.mrev8.has_sigmas();
  if (!any_sigmas) res.warnings.push_back("no sigmas; unit weights used");
  return res;
}

FitResult fit_stretched_exp(const DecayCurve& curve, std::optional<double> fixed_power) {
  curve.validate();
  if (curve.size() < 4) throw DataError("fit_stretched_exp: need at least 4 points");
  const double t_max = curve.times.back();

  // initial guesses: amplitude from the first point, timescale from the
  // 1/e crossing of the data
  double a0 = curve.values.front();
  if (!(std::abs(a0) > 1e-6)) a0 = 1.0;
  double t0 = t_max / 2.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.values[i] < a0 * 0.3678794411714423) {
      t0 = std::max(curve.times[i], 1e-6);
      break;
    }
  }
  const bool free_power = !fixed_power.has_value();
  const int np = free_power ? 3 : 2;

  const auto resid = [&](const VectorXd& x, VectorXd& r) {
    const double a = x[0];
    const double tscale = std::exp(x[1]);
    const double p = free_power ? x[2] : *fixed_power;
    r.resize(static_cast<Eigen::Index>(curve.size()));
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double m = a * std::exp(-std::pow(curve.times[i] / tscale, p));
      const double s = curve.has_sigmas() ? curve.sigmas[i] : 1.0;
      r[static_cast<Eigen::Index>(i)] = (curve.values[i] - m) / s;
    }
  };

  VectorXd x0(np), lo(np), hi(np);
  x0[0] = a0;
  x0[1] = std::log(t0);
  lo[0] = -10.0;
  hi[0] = 10.0;
  lo[1] = std::log(1e-9);
  hi[1] = std::log(1e6 * std::max(t_max, 1.0));
  if (free_power) {
    x0[2] = 1.0;
    lo[2] = 0.2;
    hi[2] = 4.0;
  }
  LmOptions opts;
  const LmOutcome out = lm_fit(resid, x0, opts, &lo, &hi);

  FitResult res;
  res.param_names = {"amplitude", "timescale"};
  const double tscale = std::exp(out.x[1]);
  res.params = {{"amplitude", out.x[0]}, {"timescale", tscale}};
  if (free_power) {
    res.param_names.push_back("power");
    res.params["power"] = out.x[2];
  } else {
    res.params["power"] = *fixed_power;
  }
  res.chi2 = out.chi2;
  res.dof = static_cast<int>(curve.size()) - np;
  res.n_iter = out.n_iter;
  res.converged = out.converged;
  if (out.rank_deficient) res.warnings.push_back("rank-deficient Jacobian at optimum");

  MatrixXd d = MatrixXd::Identity(np, np);
  d(1, 1) = tscale;
  const double scale = res.dof > 0 ? std::max(out.chi2 / res.dof, 0.0) : 1.0;
  res.covariance = d * out.covariance * d * scale;
  for (int i = 0; i < np; ++i) {
    res.sigmas[res.param_names[i]] = std::sqrt(std::max(0.0, res.covariance(i, i)));
  }
  if (!curve.has_sigmas()) res.warnings.push_back("no sigmas; unit weights used");

  // degenerate inputs: non-decaying data push the timescale to the bound
  if (tscale > 50.0 * t_max) {
    res.converged = false;
    res.warnings.push_back("timescale unbounded (non-decaying input)");
  }
  return res;
}

DensityScanResult extract_density(const DecayCurve& xy4_curve, double w, double tau,
                                  double omega_l, std::span<const double> separations,
                                  int n_realizations, std::uint64_t seed,
                                  int n_neighbors, int threads) {
  xy4_curve.validate();
  if (xy4_curve.size() == 0) throw DataError("extract_density: empty curve");
  if (separations.empty()) throw ConfigError("extract_density: empty separation grid");
  for (std::size_t i = 1; i < separations.size(); ++i) {
    if (!(separations[i] > separations[i - 1])) {
      throw ConfigError("extract_density: separations must be strictly increasing");
    }
  }

  DensityScanResult scan;
  scan.separations.assign(separations.begin(), separations.end());
  scan.chi2s.reserve(separations.size());

  PulseSequence seq;
  seq.kind = SequenceKind::XY4;

  for (std::size_t si = 0; si < separations.size(); ++si) {
    const double sep = separations[si];
    ClusterTemplate tpl;
    tpl.n_spins = n_neighbors + 1;
    tpl.density = 1.0 / (sep * sep);
    tpl.noise = NoiseModel{w, tau, omega_l};
    const double guard = std::max(std::max(omega_l, w), 1e-12);
    tpl.dt = std::min(tau / 10.0, 2.0 * 3.14159265358979323846 / (10.0 * guard));
    const CorrelationResult sim = sequence_response(
        tpl, seq, std::span<const double>(xy4_curve.times.data(), xy4_curve.size()),
        n_realizations, derive_seed(seed, si), threads);
    scan.chi2s.push_back(chi2_statistic(xy4_curve,
                                        std::span<const double>(sim.correlation.data(),
                                                                sim.correlation.size()),
                                        nullptr));
  }

  // locate the chi^2 minimum; uncertainty from a local quadratic (chi^2 + 1)
  const std::size_t imin =
      std::distance(scan.chi2s.begin(), std::min_element(scan.chi2s.begin(), scan.chi2s.end()));
  FitResult& res = scan.fit;
  res.param_names = {"separation_nm"};
  res.chi2 = scan.chi2s[imin];
  res.dof = static_cast<int>(xy4_curve.size()) - 1;
  res.converged = true;
  res.n_iter = 1;
  if (!xy4_curve.has_sigmas()) res.warnings.push_back("no sigmas; unit weights used");

  double sep_best = scan.separations[imin];
  double sigma = std::numeric_limits<double>::quiet_NaN();
  if (scan.separations.size() == 1) {
    res.warnings.push_back("single-point grid; uncertainty undefined");
    res.converged = false;
  } else if (imin == 0 || imin + 1 == scan.separations.size()) {
    res.warnings.push_back("chi^2 minimum at grid boundary");
  } else {
    // quadratic through the minimum and its neighbors
    const double x0 = scan.separations[imin - 1], x1 = scan.separations[imin],
                 x2 = scan.separations[imin + 1];
    const double y0 = scan.chi2s[imin - 1], y1 = scan.chi2s[imin], y2 = scan.chi2s[imin + 1];
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double a = (d12 - d01) / (x2 - x0);  // half of second derivative
    if (a > 0.0) {
      sep_best = 0.5 * (x0 + x1) - 0.5 * d01 / (2.0 * a) + 0.0;
      // vertex of the interpolating parabola
      const double b = d01 - a * (x0 + x1);
      sep_best = -b / (2.0 * a);
      sigma = std::sqrt(1.0 / a);  // chi^2 rises by 1 at distance sqrt(1/a)
    } else {
      res.warnings.push_back("chi^2 not locally quadratic at minimum");
    }
  }
  res.params["separation_nm"] = sep_best;
  res.sigmas["separation_nm"] = sigma;
  res.covariance = Eigen::MatrixXd::Constant(1, 1, sigma * sigma);
  return scan;
}

}  // namespace spindyn
