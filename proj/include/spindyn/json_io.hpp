#pragma once

#include <string>

#include "json.hpp"
#include "spindyn/constants.hpp"
#include "spindyn/geometry.hpp"
#include "spindyn/inference.hpp"
#include "spindyn/noise.hpp"

namespace spindyn {

nlohmann::json to_json(const Constants& c);
Constants constants_from_json(const nlohmann::json& j);
Constants load_constants(const std::string& path);

nlohmann::json to_json(const NoiseModel& m);
NoiseModel noise_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SpinEnsemble& e);
SpinEnsemble ensemble_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitResult& r);

void write_json_atomic(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace spindyn
