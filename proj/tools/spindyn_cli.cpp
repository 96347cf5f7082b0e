// spindyn: command-line front end for the surface-spin relaxation toolkit.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spindyn/cluster.hpp"
#include "spindyn/curve.hpp"
#include "spindyn/errors.hpp"
#include "spindyn/hopping.hpp"
#include "spindyn/inference.hpp"
#include "spindyn/json_io.hpp"
#include "spindyn/noise.hpp"
#include "spindyn/sequence.hpp"

namespace {

using nlohmann::json;
using namespace spindyn;

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = 3.14159265358979323846;

namespace fs = std::filesystem;

std::string out_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("output directory not writable: " + dir);
  }
}

void write_manifest(const std::string& dir, const std::string& command,
                    const json& config, const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["config"] = config;
  j["outputs"] = outputs;
  write_json_atomic(out_path(dir, command + "_manifest.json"), j);
}

SequenceKind parse_kind(const std::string& s) {
  if (s == "ramsey") return SequenceKind::Ramsey;
  if (s == "echo") return SequenceKind::Echo;
  if (s == "xy4") return SequenceKind::XY4;
  if (s == "mrev8") return SequenceKind::MREV8InEcho;
  if (s == "deer") return SequenceKind::DEER;
  throw ConfigError("unknown sequence kind: " + s);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

double auto_dt(const NoiseModel& m) {
  double dt = m.tau / 10.0;
  const double fmax = std::max(m.omega_l, m.w);
  if (fmax > 0.0) dt = std::min(dt, 2.0 * kPi / (10.0 * fmax));
  return 0.999 * dt;
}

struct CommonOpts {
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 0;
  int realizations = 100;
  std::string constants_path;

  Constants constants() const {
    return constants_path.empty() ? Constants{} : load_constants(constants_path);
  }
};

void add_common(CLI::App* cmd, CommonOpts* c) {
  const char* env = std::getenv("SPINDYN_OUT_DIR");
  if (env && *env) c->out_dir = env;
  cmd->add_option("--out-dir", c->out_dir, "output directory (env SPINDYN_OUT_DIR)");
  cmd->add_option("--seed", c->seed, "random seed");
  cmd->add_option("--threads", c->threads, "worker threads (0 = hardware)");
  cmd->add_option("--realizations", c->realizations, "disorder realizations");
  cmd->add_option("--constants", c->constants_path, "constants override JSON");
}

// ---------------------------------------------------------------------------
// predict: closed-form and numeric decay curves for one sequence

struct PredictOpts {
  CommonOpts common;
  std::string seq = "echo";
  double w = 4.40, tau = 14.6, omega_l = 2.0 * kPi * 3.11;
  double t2 = 0.0;  // 0 = bath-only (infinite dipolar T2)
  double detuning = 0.0;
  double tmax = 5.0;
  int points = 200;
  double pi_time = 0.0;
  std::string couplings;  // deer only
};

int run_predict(const PredictOpts& o) {
  ensure_out_dir(o.common.out_dir);
  const SequenceKind kind = parse_kind(o.seq);
  std::vector<std::string> outputs;

  json cfg{{"seq", o.seq},        {"w", o.w},
           {"tau", o.tau},        {"omega_l", o.omega_l},
           {"t2", o.t2},          {"detuning", o.detuning},
           {"tmax", o.tmax},      {"points", o.points},
           {"pi_time", o.pi_time}, {"seed", o.common.seed}};

  const auto ts = linspace(0.0, o.tmax, o.points);
  if (kind == SequenceKind::DEER) {
    const auto ks = parse_list(o.couplings);
    DecayCurve c;
    for (double t : ts) {
      c.times.push_back(t);
      c.values.push_back(deer_signal(ks, t));
    }
    const auto path = out_path(o.common.out_dir, "predict_closed.csv");
    write_curve_csv(path, c);
    outputs.push_back(path);
    cfg["couplings"] = ks;
  } else {
    const NoiseModel m{o.w, o.tau, o.omega_l};
    const double t2 = o.t2 > 0.0 ? o.t2 : std::numeric_limits<double>::infinity();
    DecayCurve closed, numeric;
    bool outside_validity = false;
    for (double t : ts) {
      const double tt = finite_pulse_time(kind, t, o.pi_time);
      closed.times.push_back(tt);
      closed.values.push_back(closed_form_decay(kind, t, m, t2, o.detuning));
      if (!closed_form_in_validity(kind, t, m)) outside_validity = true;
      double v = std::exp(-chi_numeric(kind, t, m));
      if (std::isfinite(t2)) v *= std::exp(-(t / t2) * (t / t2));
      if (kind == SequenceKind::Ramsey) v *= std::cos(o.detuning * t);
      numeric.times.push_back(tt);
      numeric.values.push_back(v);
    }
    const auto pc = out_path(o.common.out_dir, "predict_closed.csv");
    const auto pn = out_path(o.common.out_dir, "predict_numeric.csv");
    write_curve_csv(pc, closed);
    write_curve_csv(pn, numeric);
    outputs = {pc, pn};
    cfg["ramsey_t3_term_outside_validity"] = outside_validity;
  }
  write_manifest(o.common.out_dir, "predict", cfg, outputs);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate: cluster-sim correlations

struct SimulateOpts {
  CommonOpts common;
  std::string kind = "sz";  // sz | seq | spinlock
  std::string seq = "echo";
  int n_spins = 6;
  double density = 0.0142;
  double separation = 0.0;  // overrides density when > 0
  double min_radius = 2.0;
  double w = 4.40, tau = 14.6, omega_l = 0.0;
  double dt = 0.0;  // 0 = auto from the resolution guards
  double tmax = 10.0;
  int points = 40;
  double omega = 0.0;  // spin-lock drive
  bool no_flip_flop = false;
  double tmin = 0.0;
};

int run_simulate(const SimulateOpts& o) {
  ensure_out_dir(o.common.out_dir);
  if (o.kind == "trajectory") {
    const NoiseModel m{o.w, o.tau, o.omega_l};
    const double dt = o.dt > 0.0 ? o.dt : auto_dt(m);
    const auto traj = generate_trajectory(m, dt, o.tmax, o.common.seed);
    const auto path = out_path(o.common.out_dir, "trajectory.csv");
    write_trajectory_csv(path, traj);
    json cfg{{"kind", o.kind}, {"noise", to_json(m)}, {"dt", dt},
             {"tmax", o.tmax}, {"seed", o.common.seed}};
    write_manifest(o.common.out_dir, "simulate", cfg, {path});
    return 0;
  }
  ClusterTemplate tpl;
  tpl.n_spins = o.n_spins;
  tpl.density = o.separation > 0.0 ? 1.0 / (o.separation * o.separation) : o.density;
  tpl.min_radius = o.min_radius;
  tpl.noise = NoiseModel{o.w, o.tau, o.omega_l};
  tpl.flip_flop = !o.no_flip_flop;
  tpl.constants = o.common.constants();
  tpl.dt = o.dt > 0.0 ? o.dt : auto_dt(tpl.noise);

  const double t0 = o.tmin > 0.0 ? o.tmin : o.tmax / o.points;
  const auto grid = linspace(t0, o.tmax, o.points);

  CorrelationResult res;
  if (o.kind == "sz") {
    res = sz_autocorrelation(tpl, grid, o.common.realizations, o.common.seed,
                             o.common.threads);
  } else if (o.kind == "spinlock") {
    res = spin_lock_decay(tpl, o.omega, grid, o.common.realizations, o.common.seed,
                          o.common.threads);
  } else if (o.kind == "seq") {
    PulseSequence seq;
    seq.kind = parse_kind(o.seq);
    res = sequence_response(tpl, seq, grid, o.common.realizations, o.common.seed,
                            o.common.threads);
  } else {
    throw ConfigError("simulate: unknown kind " + o.kind);
  }

  DecayCurve c;
  c.times = res.times;
  c.values = res.correlation;
  c.sigmas = res.std_error;
  for (double& v : c.values) v = std::clamp(v, -1.05, 1.05);
  const auto csv = out_path(o.common.out_dir, "simulate.csv");
  write_curve_csv(csv, c);

  json meta{{"kind", o.kind},
            {"seq", o.seq},
            {"n_spins", o.n_spins},
            {"density", tpl.density},
            {"min_radius", o.min_radius},
            {"noise", to_json(tpl.noise)},
            {"dt", tpl.dt},
            {"omega", o.omega},
            {"flip_flop", tpl.flip_flop},
            {"realizations", o.common.realizations},
            {"seed", o.common.seed}};
  const auto meta_path = out_path(o.common.out_dir, "simulate_meta.json");
  write_json_atomic(meta_path, meta);
  write_manifest(o.common.out_dir, "simulate", meta, {csv, meta_path});
  return 0;
}

// ---------------------------------------------------------------------------
// hopping: survival curves, W-tau scans, T_z prediction

struct HoppingOpts {
  CommonOpts common;
  bool survival = false;
  bool scan_wtau = false;
  bool tz = false;
  double w = 4.40, tau = 14.6;
  double j1 = 0.71, j = 0.57, kappa = 0.31;
  double alpha = 5.0, beta = 1.0, density = 0.0142, r0 = 2.0, j0 = 326.7;
  double tmax = 0.0;  // 0 = 100 tau
  int points = 60;
  bool long_time = false;
  std::string w_list = "2.0,3.0,4.0,5.0,6.0";
  std::string tau_list = "5.0,10.0,20.0,40.0";
};

HoppingParams hopping_params(const HoppingOpts& o) {
  HoppingParams p;
  p.alpha = o.alpha;
  p.beta = o.beta;
  p.kappa = o.kappa;
  p.density = o.density;
  p.r0 = o.r0;
  p.j0 = o.j0;
  return p;
}

int run_hopping(const HoppingOpts& o) {
  ensure_out_dir(o.common.out_dir);
  const HoppingParams p = hopping_params(o);
  std::vector<std::string> outputs;
  json cfg{{"w", o.w},         {"tau", o.tau},     {"j1", o.j1},
           {"j", o.j},         {"kappa", o.kappa}, {"alpha", o.alpha},
           {"beta", o.beta},   {"density", o.density}, {"r0", o.r0},
           {"j0", o.j0},       {"long_time", o.long_time}};

  if (o.survival) {
    const double tmax = o.tmax > 0.0 ? o.tmax : 100.0 * o.tau;
    const auto form = o.long_time ? SurvivalForm::LongTime : SurvivalForm::PlusTau;
    DecayCurve closed, renorm, integral;
    for (int i = 0; i < o.points; ++i) {
      const double t = tmax * std::pow(1e-3, 1.0 - static_cast<double>(i) / (o.points - 1));
      closed.times.push_back(t);
      closed.values.push_back(survival_closed(t, o.w, o.tau, p, form));
      renorm.times.push_back(t);
      renorm.values.push_back(survival_closed_renormalized(t, o.w, o.tau, p, form));
      integral.times.push_back(t);
      integral.values.push_back(survival_integral(t, o.w, o.tau, p));
    }
    for (const auto& [name, curve] :
         {std::pair<std::string, const DecayCurve*>{"hopping_survival_closed.csv", &closed},
          {"hopping_survival_renorm.csv", &renorm},
          {"hopping_survival_integral.csv", &integral}}) {
      const auto path = out_path(o.common.out_dir, name);
      write_curve_csv(path, *curve);
      outputs.push_back(path);
    }
  }

  if (o.scan_wtau) {
    // 1/e times of the long-time closed survival vs tau_e W_e, plus the
    // self-consistent T_z prediction
    std::ostringstream table;
    table << "w,tau,w_e,tau_e,t1e_closed,tz_pred\n";
    for (double w : parse_list(o.w_list)) {
      for (double tau : parse_list(o.tau_list)) {
        const double tz = predict_tz(w, tau, o.j1, o.j, o.kappa);
        const auto d = effective_disorder(w, tau, o.j1, tz);
        // bisect P(t) = 1/e for the long-time form
        double lo = 1e-6, hi = 1e6 * tau;
        for (int it = 0; it < 200; ++it) {
          const double mid = std::sqrt(lo * hi);
          (survival_closed(mid, w, tau, p, SurvivalForm::LongTime) > std::exp(-1.0) ? lo
                                                                                    : hi) = mid;
        }
        table << format_double(w) << "," << format_double(tau) << ","
              << format_double(d.w_e) << "," << format_double(d.tau_e) << ","
              << format_double(std::sqrt(lo * hi)) << "," << format_double(tz) << "\n";
      }
    }
    const auto path = out_path(o.common.out_dir, "hopping_scan_wtau.csv");
    write_text_atomic(path, table.str());
    outputs.push_back(path);
  }

  if (o.tz || (!o.survival && !o.scan_wtau)) {
    const double tz = predict_tz(o.w, o.tau, o.j1, o.j, o.kappa);
    const auto d = effective_disorder(o.w, o.tau, o.j1, tz);
    json res{{"tz_us", tz}, {"w_e", d.w_e}, {"tau_e", d.tau_e}};
    const auto path = out_path(o.common.out_dir, "hopping_tz.json");
    write_json_atomic(path, res);
    outputs.push_back(path);
    std::cout << "T_z = " << tz << " us (W_e = " << d.w_e << " rad/us, tau_e = " << d.tau_e
              << " us)\n";
  }
  write_manifest(o.common.out_dir, "hopping", cfg, outputs);
  return 0;
}

// ---------------------------------------------------------------------------
// fit: joint multi-sequence fit or stretched-exponential fit

struct FitOpts {
  CommonOpts common;
  bool joint = false;
  std::string ramsey, echo, xy4, mrev8;
  std::string stretched;
  std::string power = "free";
  double omega_l = 2.0 * kPi * 3.11;
  double init_j1 = 0.71, init_w = 4.4, init_tau = 14.6;
  double init_detuning = 2.0 * kPi * 9.2;
  int multistart = 5;
};

void print_fit(const FitResult& r) {
  std::cout << (r.converged ? "converged" : "NOT converged") << " in " << r.n_iter
            << " iterations, chi2/dof = "
            << (r.dof > 0 ? r.chi2 / r.dof : r.chi2) << "\n";
  for (const auto& name : r.param_names) {
    std::cout << "  " << name << " = " << r.params.at(name);
    const auto s = r.sigmas.find(name);
    if (s != r.sigmas.end() && std::isfinite(s->second)) {
      std::cout << " +- " << s->second;
    }
    std::cout << "\n";
  }
  for (const auto& wmsg : r.warnings) std::cout << "  warning: " << wmsg << "\n";
}

int run_fit(const FitOpts& o) {
  ensure_out_dir(o.common.out_dir);
  FitResult res;
  json cfg{{"omega_l", o.omega_l}, {"seed", o.common.seed}};
  if (o.joint) {
    JointFitData data;
    data.ramsey = read_curve_csv(o.ramsey);
    data.echo = read_curve_csv(o.echo);
    data.xy4 = read_curve_csv(o.xy4);
    data.mrev8 = read_curve_csv(o.mrev8);
    data.omega_l = o.omega_l;
    const std::map<std::string, double> init = {{"j1", o.init_j1},
                                                {"w", o.init_w},
                                                {"tau", o.init_tau},
                                                {"detuning", o.init_detuning}};
    res = fit_joint(data, init, o.common.seed, o.multistart);
    cfg["mode"] = "joint";
    cfg["inputs"] = {o.ramsey, o.echo, o.xy4, o.mrev8};
  } else if (!o.stretched.empty()) {
    const auto curve = read_curve_csv(o.stretched);
    std::optional<double> power;
    if (o.power != "free") power = std::stod(o.power);
    res = fit_stretched_exp(curve, power);
    cfg["mode"] = "stretched";
    cfg["input"] = o.stretched;
    cfg["power"] = o.power;
  } else {
    throw ConfigError("fit: choose --joint or --stretched <curve.csv>");
  }
  const auto path = out_path(o.common.out_dir, "fit_result.json");
  write_json_atomic(path, to_json(res));
  write_manifest(o.common.out_dir, "fit", cfg, {path});
  print_fit(res);
  return res.converged ? 0 : 4;
}

// ---------------------------------------------------------------------------
// collapse: rescale curve time axes by tau_e W_e

struct CollapseOpts {
  CommonOpts common;
  std::vector<std::string> curves;
  std::string params_json;  // array of {w_e, tau_e} or {w, tau, j1[, kappa, j]}
};

int run_collapse(const CollapseOpts& o) {
  ensure_out_dir(o.common.out_dir);
  if (o.curves.empty()) throw ConfigError("collapse: no input curves");
  const json spec = read_json(o.params_json);
  if (!spec.is_array() || spec.size() != o.curves.size()) {
    throw DataError("collapse: params JSON must be an array matching the curve list");
  }
  std::vector<DecayCurve> curves;
  std::vector<EffectiveDisorder> disorder;
  for (std::size_t i = 0; i < o.curves.size(); ++i) {
    curves.push_back(read_curve_csv(o.curves[i]));
    const auto& e = spec[i];
    if (e.contains("w_e") && e.contains("tau_e")) {
      disorder.push_back({e.at("w_e").get<double>(), e.at("tau_e").get<double>()});
    } else {
      const double w = e.at("w").get<double>();
      const double tau = e.at("tau").get<double>();
      const double j1 = e.value("j1", 0.0);
      const double kappa = e.value("kappa", 0.31);
      const double j = e.value("j", 0.57);
      const double tz = j1 > 0.0 ? predict_tz(w, tau, j1, j, kappa) : 0.0;
      disorder.push_back(effective_disorder(w, tau, j1, tz));
    }
  }
  const auto rescaled = collapse_transform(curves, disorder);
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < rescaled.size(); ++i) {
    const auto stem = fs::path(o.curves[i]).stem().string();
    const auto path = out_path(o.common.out_dir, stem + "_rescaled.csv");
    write_curve_csv(path, rescaled[i], "t_rescaled");
    outputs.push_back(path);
  }
  json cfg{{"curves", o.curves}, {"params", spec}};
  write_manifest(o.common.out_dir, "collapse", cfg, outputs);
  return 0;
}

// ---------------------------------------------------------------------------
// density: chi^2 separation scan against cluster simulations

struct DensityOpts {
  CommonOpts common;
  std::string curve;
  double w = 4.13, tau = 14.6, omega_l = 0.0;
  double sep_min = 6.0, sep_max = 12.0;
  int sep_count = 7;
  int neighbors = 5;
};

int run_density(const DensityOpts& o) {
  ensure_out_dir(o.common.out_dir);
  const auto curve = read_curve_csv(o.curve);
  const auto seps = linspace(o.sep_min, o.sep_max, o.sep_count);
  const auto scan = extract_density(curve, o.w, o.tau, o.omega_l, seps,
                                    o.common.realizations, o.common.seed, o.neighbors,
                                    o.common.threads);
  std::ostringstream table;
  table << "separation_nm,chi2\n";
  for (std::size_t i = 0; i < scan.separations.size(); ++i) {
    table << format_double(scan.separations[i]) << "," << format_double(scan.chi2s[i])
          << "\n";
  }
  const auto table_path = out_path(o.common.out_dir, "density_chi2.csv");
  write_text_atomic(table_path, table.str());
  const auto json_path = out_path(o.common.out_dir, "density_result.json");
  write_json_atomic(json_path, to_json(scan.fit));
  json cfg{{"curve", o.curve},       {"w", o.w},
           {"tau", o.tau},           {"omega_l", o.omega_l},
           {"separations", seps},    {"neighbors", o.neighbors},
           {"realizations", o.common.realizations}, {"seed", o.common.seed}};
  write_manifest(o.common.out_dir, "density", cfg, {table_path, json_path});
  print_fit(scan.fit);
  return 0;
}

// ---------------------------------------------------------------------------
// depth: B_rms <-> depth conversions

struct DepthOpts {
  CommonOpts common;
  double brms = 0.0;   // G; forward mode when 0 and depth > 0
  double depth = 0.0;  // nm
  std::string geometry = "half";  // layer | half
  std::string component = "par";  // par | perp
  double proton_density = 0.0;
  double spin = 0.5;
};

int run_depth(const DepthOpts& o) {
  ensure_out_dir(o.common.out_dir);
  const LayerKind kind = o.geometry == "layer" ? LayerKind::TwoDLayer : LayerKind::HalfSpace;
  const FieldComponent comp =
      o.component == "perp" ? FieldComponent::Transverse : FieldComponent::Longitudinal;
  if (!(o.proton_density > 0.0)) throw ConfigError("depth: --proton-density required");
  const Constants c = o.common.constants();

  json res{{"geometry", o.geometry},
           {"component", o.component},
           {"proton_density", o.proton_density},
           {"spin", o.spin}};
  if (o.brms > 0.0) {
    const double d = depth_from_brms(o.brms, kind, o.proton_density, comp, o.spin, c);
    res["brms_gauss"] = o.brms;
    res["depth_nm"] = d;
    std::cout << "depth = " << d << " nm\n";
  } else if (o.depth > 0.0) {
    LayerGeometry g{kind, o.depth, o.proton_density, o.spin};
    const double b = std::sqrt(brms_squared(g, comp, c));
    res["depth_nm"] = o.depth;
    res["brms_gauss"] = b;
    std::cout << "brms = " << b << " G\n";
  } else {
    throw ConfigError("depth: give --brms (to invert) or --depth (to evaluate)");
  }
  const auto path = out_path(o.common.out_dir, "depth_result.json");
  write_json_atomic(path, res);
  write_manifest(o.common.out_dir, "depth", res, {path});
  return 0;
}

// ---------------------------------------------------------------------------
// t1rho: dressed relaxation rate vs drive strength

struct T1rhoOpts {
  CommonOpts common;
  double w = 4.40, tau = 14.6, omega_l = 2.0 * kPi * 3.11;
  double omega_min = 0.0, omega_max = 100.0;
  int points = 60;
  double prefactor = 0.5;
};

int run_t1rho(const T1rhoOpts& o) {
  ensure_out_dir(o.common.out_dir);
  const NoiseModel m{o.w, o.tau, o.omega_l};
  const Constants c = o.common.constants();
  std::ostringstream table;
  table << "omega_rad_us,rate_per_us\n";
  for (int i = 0; i < o.points; ++i) {
    const double om = o.omega_min + (o.omega_max - o.omega_min) * i / (o.points - 1);
    table << format_double(om) << "," << format_double(t1rho_rate(om, m, o.prefactor, c))
          << "\n";
  }
  const auto path = out_path(o.common.out_dir, "t1rho.csv");
  write_text_atomic(path, table.str());
  json cfg{{"w", o.w},
           {"tau", o.tau},
           {"omega_l", o.omega_l},
           {"omega_min", o.omega_min},
           {"omega_max", o.omega_max},
           {"points", o.points},
           {"prefactor", o.prefactor}};
  write_manifest(o.common.out_dir, "t1rho", cfg, {path});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spindyn: dipolar surface-spin relaxation toolkit"};
  app.require_subcommand(1);

  PredictOpts po;
  auto* predict = app.add_subcommand("predict", "closed-form and numeric decay curves");
  add_common(predict, &po.common);
  predict->add_option("--seq", po.seq, "ramsey|echo|xy4|mrev8|deer");
  predict->add_option("--w", po.w, "disorder width, rad/us");
  predict->add_option("--tau", po.tau, "correlation time, us");
  predict->add_option("--omega-l", po.omega_l, "proton Larmor angular frequency, rad/us");
  predict->add_option("--t2", po.t2, "dipolar T2, us (0 = bath only)");
  predict->add_option("--detuning", po.detuning, "Ramsey detuning, rad/us");
  predict->add_option("--tmax", po.tmax, "maximum free-evolution time, us");
  predict->add_option("--points", po.points, "number of samples");
  predict->add_option("--pi-time", po.pi_time, "pi-pulse duration for time accounting, us");
  predict->add_option("--couplings", po.couplings, "DEER couplings k_i, comma list (rad/us)");

  SimulateOpts so;
  auto* simulate = app.add_subcommand("simulate", "exact small-cluster simulation");
  add_common(simulate, &so.common);
  simulate->add_option("--kind", so.kind, "sz|seq|spinlock|trajectory");
  simulate->add_option("--seq", so.seq, "sequence for kind=seq");
  simulate->add_option("--n-spins", so.n_spins, "total spins (central + bath, <= 10)");
  simulate->add_option("--density", so.density, "areal density, nm^-2");
  simulate->add_option("--separation", so.separation, "mean separation, nm (overrides density)");
  simulate->add_option("--min-radius", so.min_radius, "exclusion radius, nm");
  simulate->add_option("--w", so.w, "disorder width, rad/us");
  simulate->add_option("--tau", so.tau, "correlation time, us");
  simulate->add_option("--omega-l", so.omega_l, "proton Larmor angular frequency, rad/us");
  simulate->add_option("--dt", so.dt, "trajectory step, us (0 = auto)");
  simulate->add_option("--tmin", so.tmin, "first sample time, us");
  simulate->add_option("--tmax", so.tmax, "last sample time, us");
  simulate->add_option("--points", so.points, "grid points");
  simulate->add_option("--omega", so.omega, "spin-lock drive, rad/us");
  simulate->add_flag("--no-flip-flop", so.no_flip_flop, "disable flip-flop terms");

  HoppingOpts ho;
  auto* hopping = app.add_subcommand("hopping", "resonance-counting model");
  add_common(hopping, &ho.common);
  hopping->add_flag("--survival", ho.survival, "emit survival curves");
  hopping->add_flag("--scan-wtau", ho.scan_wtau, "emit a (W, tau) scan table");
  hopping->add_flag("--tz", ho.tz, "predict T_z");
  hopping->add_option("--w", ho.w);
  hopping->add_option("--tau", ho.tau);
  hopping->add_option("--j1", ho.j1, "nearest-neighbor coupling, rad/us");
  hopping->add_option("--j", ho.j, "mean dipolar strength, rad/us");
  hopping->add_option("--kappa", ho.kappa);
  hopping->add_option("--alpha", ho.alpha);
  hopping->add_option("--beta", ho.beta);
  hopping->add_option("--density", ho.density, "areal density, nm^-2");
  hopping->add_option("--r0", ho.r0, "exclusion radius, nm");
  hopping->add_option("--j0", ho.j0, "dipolar prefactor, nm^3/us");
  hopping->add_option("--tmax", ho.tmax, "survival curve end time, us (0 = 100 tau)");
  hopping->add_option("--points", ho.points);
  hopping->add_flag("--long-time", ho.long_time, "use the long-time closed form");
  hopping->add_option("--w-list", ho.w_list, "scan W values, comma list");
  hopping->add_option("--tau-list", ho.tau_list, "scan tau values, comma list");

  FitOpts fo;
  auto* fit = app.add_subcommand("fit", "parameter extraction");
  add_common(fit, &fo.common);
  fit->add_flag("--joint", fo.joint, "joint Ramsey/echo/XY4/MREV8 fit");
  fit->add_option("--ramsey", fo.ramsey, "Ramsey curve CSV");
  fit->add_option("--echo", fo.echo, "echo curve CSV");
  fit->add_option("--xy4", fo.xy4, "XY4 curve CSV");
  fit->add_option("--mrev8", fo.mrev8, "MREV8 curve CSV");
  fit->add_option("--stretched", fo.stretched, "stretched-exponential fit of one curve");
  fit->add_option("--power", fo.power, "fixed power or 'free'");
  fit->add_option("--omega-l", fo.omega_l, "proton Larmor angular frequency, rad/us");
  fit->add_option("--init-j1", fo.init_j1);
  fit->add_option("--init-w", fo.init_w);
  fit->add_option("--init-tau", fo.init_tau);
  fit->add_option("--init-detuning", fo.init_detuning);
  fit->add_option("--multistart", fo.multistart);

  CollapseOpts co;
  auto* collapse = app.add_subcommand("collapse", "rescale curves by tau_e W_e");
  add_common(collapse, &co.common);
  collapse->add_option("--curve", co.curves, "input curve CSV (repeatable)");
  collapse->add_option("--params", co.params_json, "per-curve disorder JSON array");

  DensityOpts dno;
  auto* density = app.add_subcommand("density", "extract mean separation via chi^2 scan");
  add_common(density, &dno.common);
  density->add_option("--curve", dno.curve, "XY4 data curve CSV");
  density->add_option("--w", dno.w);
  density->add_option("--tau", dno.tau);
  density->add_option("--omega-l", dno.omega_l);
  density->add_option("--sep-min", dno.sep_min, "nm");
  density->add_option("--sep-max", dno.sep_max, "nm");
  density->add_option("--sep-count", dno.sep_count);
  density->add_option("--neighbors", dno.neighbors);

  DepthOpts dpo;
  auto* depth = app.add_subcommand("depth", "B_rms / depth conversions");
  add_common(depth, &dpo.common);
  depth->add_option("--brms", dpo.brms, "G");
  depth->add_option("--depth", dpo.depth, "nm");
  depth->add_option("--geometry", dpo.geometry, "layer|half");
  depth->add_option("--component", dpo.component, "par|perp");
  depth->add_option("--proton-density", dpo.proton_density, "nm^-2 (layer) or nm^-3 (half)");
  depth->add_option("--spin", dpo.spin, "nuclear spin quantum number");

  T1rhoOpts to;
  auto* t1rho = app.add_subcommand("t1rho", "dressed relaxation rate vs drive");
  add_common(t1rho, &to.common);
  t1rho->add_option("--w", to.w);
  t1rho->add_option("--tau", to.tau);
  t1rho->add_option("--omega-l", to.omega_l);
  t1rho->add_option("--omega-min", to.omega_min);
  t1rho->add_option("--omega-max", to.omega_max);
  t1rho->add_option("--points", to.points);
  t1rho->add_option("--prefactor", to.prefactor, "golden-rule prefactor (default 1/2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (*predict) return run_predict(po);
    if (*simulate) return run_simulate(so);
    if (*hopping) return run_hopping(ho);
    if (*fit) return run_fit(fo);
    if (*collapse) return run_collapse(co);
    if (*density) return run_density(dno);
    if (*depth) return run_depth(dpo);
    if (*t1rho) return run_t1rho(to);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
