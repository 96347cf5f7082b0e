#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spindyn/cluster.hpp"
#include "spindyn/curve.hpp"
#include "spindyn/noise.hpp"

namespace spindyn {

struct FitResult {
  std::vector<std::string> param_names;
  std::map<std::string, double> params;
  std::map<std::string, double> sigmas;
  Eigen::MatrixXd covariance;  // ordered as param_names
  double chi2 = 0.0;
  int dof = 0;
  bool converged = false;
  int n_iter = 0;
  std::vector<std::string> warnings;
};

// Weighted residual sum Sum ((y - m)/sigma)^2; unit weights with a warning
// when the curve carries no sigmas.
double chi2_statistic(const DecayCurve& data, std::span<const double> model,
                      std::vector<std::string>* warnings = nullptr);

// Damped least squares (Levenberg-Marquardt) with numeric Jacobian and
// optional box projection. Residuals must be pre-weighted.
struct LmOptions {
  int max_iter = 500;
  double step_tol = 1e-8;
  double lambda0 = 1e-3;
};

struct LmOutcome {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;  // (J^T J)^-1, unscaled
  double chi2 = 0.0;
  int n_iter = 0;
  bool converged = false;
  bool rank_deficient = false;
};

LmOutcome lm_fit(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& resid,
                 Eigen::VectorXd x0, const LmOptions& opts = {},
                 const Eigen::VectorXd* lower = nullptr,
                 const Eigen::VectorXd* upper = nullptr);

// Joint fit of Ramsey/Echo/XY4/MREV8 curves to the closed-form model with
// shared (J1, W, tau) and a per-Ramsey detuning. omega_l is held fixed.
struct JointFitData {
  DecayCurve ramsey, echo, xy4, mrev8;
  double omega_l = 0.0;
};

FitResult fit_joint(const JointFitData& data,
                    const std::map<std::string, double>& init = {},
                    std::uint64_t seed = 1, int multistart = 5);

// A exp(-(t/T)^p); pass a value to hold the power fixed, nullopt to fit it
// within (0.2, 4].
FitResult fit_stretched_exp(const DecayCurve& curve, std::optional<double> fixed_power);

// chi^2 grid search of cluster-sim XY-4 curves (central spin + n_neighbors)
// over mean separations; uncertainty from the chi^2+1 interval.
struct DensityScanResult {
  FitResult fit;
  std::vector<double> separations;
  std::vector<double> chi2s;
};

DensityScanResult extract_density(const DecayCurve& xy4_curve, double w, double tau,
                                  double omega_l, std::span<const double> separations,
                                  int n_realizations, std::uint64_t seed,
                                  int n_neighbors = 5, int threads = 0);

}  // namespace spindyn
