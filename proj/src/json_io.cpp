#include "spindyn/json_io.hpp"

#include <fstream>

#include "spindyn/curve.hpp"
#include "spindyn/errors.hpp"

namespace spindyn {

using nlohmann::json;

json to_json(const Constants& c) {
  return json{{"gamma_e", c.gamma_e}, {"gamma_n", c.gamma_n}, {"j0", c.j0}, {"hbar", c.hbar}};
}

Constants constants_from_json(const json& j) {
  Constants c;
  c.gamma_e = j.value("gamma_e", c.gamma_e);
  c.gamma_n = j.value("gamma_n", c.gamma_n);
  c.j0 = j.value("j0", c.j0);
  c.hbar = j.value("hbar", c.hbar);
  return c;
}

Constants load_constants(const std::string& path) {
  return constants_from_json(read_json(path));
}

json to_json(const NoiseModel& m) {
  return json{{"w", m.w}, {"tau", m.tau}, {"omega_l", m.omega_l}};
}

NoiseModel noise_model_from_json(const json& j) {
  NoiseModel m;
  try {
    m.w = j.at("w").get<double>();
    m.tau = j.at("tau").get<double>();
    m.omega_l = j.value("omega_l", 0.0);
  } catch (const json::exception& e) {
    throw DataError(std::string("NoiseModel JSON: ") + e.what());
  }
  m.validate();
  return m;
}

json to_json(const SpinEnsemble& e) {
  json pos = json::array();
  for (const auto& p : e.positions) pos.push_back({p[0], p[1]});
  return json{{"positions", pos},
              {"density", e.density},
              {"quantization_axis_tilt", e.quantization_axis_tilt},
              {"min_radius", e.min_radius},
              {"seed", e.seed}};
}

SpinEnsemble ensemble_from_json(const json& j) {
  SpinEnsemble e;
  try {
    for (const auto& p : j.at("positions")) {
      e.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    e.density = j.at("density").get<double>();
    e.quantization_axis_tilt = j.value("quantization_axis_tilt", kDefaultAxisTilt);
    e.min_radius = j.value("min_radius", 0.0);
    e.seed = j.value("seed", 0ull);
  } catch (const json::exception& ex) {
    throw DataError(std::string("SpinEnsemble JSON: ") + ex.what());
  }
  return e;
}

json to_json(const FitResult& r) {
  json params = json::object(), sigmas = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  for (const auto& [k, v] : r.sigmas) sigmas[k] = v;
  json cov = json::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.covariance.cols(); ++k) row.push_back(r.covariance(i, k));
    cov.push_back(row);
  }
  return json{{"param_names", r.param_names},
              {"params", params},
              {"sigmas", sigmas},
              {"covariance", cov},
              {"chi2", r.chi2},
              {"dof", r.dof},
              {"converged", r.converged},
              {"n_iter", r.n_iter},
              {"warnings", r.warnings}};
}

void write_json_atomic(const std::string& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open JSON file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace spindyn
