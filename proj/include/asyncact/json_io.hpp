#pragma once

#include <json.hpp>

#include "asyncact/model.hpp"

namespace asyncact {

// Complex numbers are [re, im] pairs; matrices are row-major nested arrays.

nlohmann::json to_json(const CMat& A);
nlohmann::json to_json(const CVec& v);
CMat cmat_from_json(const nlohmann::json& j);
CVec cvec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SystemConfig& config);
/// Missing fields keep their defaults; unknown fields are rejected.
SystemConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReceivedData& data);
ReceivedData received_from_json(const nlohmann::json& j);

}  // namespace asyncact
