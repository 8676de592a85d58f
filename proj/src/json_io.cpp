#include "asyncact/json_io.hpp"

#include <string>

namespace asyncact {

using nlohmann::json;

namespace {

json cplx(cd z) { return json::array({z.real(), z.imag()}); }

cd cplx_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json rvec(const RVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RVec rvec_from(const json& j) {
  RVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json rmat(const Eigen::MatrixXd& A) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(A(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd rmat_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd A(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) A(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return A;
}

json points(const std::vector<Point>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(json::array({p[0], p[1]}));
  return a;
}

std::vector<Point> points_from(const json& j) {
  std::vector<Point> ps;
  for (const auto& p : j) ps.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return ps;
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type");
  }
}

}  // namespace

json to_json(const CMat& A) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(cplx(A(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cplx(v(i)));
  return a;
}

CMat cmat_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  CMat A(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) A(r, c) = cplx_from(row[static_cast<std::size_t>(c)]);
  }
  return A;
}

CVec cvec_from_json(const json& j) {
  CVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = cplx_from(j[i]);
  return v;
}

json to_json(const SystemConfig& c) {
  json j = {
      {"num_aps", c.num_aps},
      {"antennas_per_ap", c.antennas_per_ap},
      {"num_devices", c.num_devices},
      {"sig_len", c.sig_len},
      {"max_delay", c.max_delay},
      {"area_side", c.area_side},
      {"activity_ratio", c.activity_ratio},
      {"noise_power_dbm", c.noise_power_dbm},
      {"max_tx_power_dbm", c.max_tx_power_dbm},
      {"pathloss_intercept_db", c.pathloss_intercept_db},
      {"pathloss_slope_db_per_decade", c.pathloss_slope_db_per_decade},
      {"shadow_std_db", c.shadow_std_db},
      {"power_percentile", c.power_percentile},
      {"rng_seed", c.rng_seed},
  };
  if (c.target_snr_db) j["target_snr_db"] = *c.target_snr_db;
  return j;
}

SystemConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("system: expected an object");
  static const char* known[] = {"num_aps",          "antennas_per_ap",
                                "num_devices",      "sig_len",
                                "max_delay",        "area_side",
                                "activity_ratio",   "noise_power_dbm",
                                "max_tx_power_dbm", "pathloss_intercept_db",
                                "pathloss_slope_db_per_decade",
                                "shadow_std_db",    "power_percentile",
                                "target_snr_db",    "rng_seed"};
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("system." + key + ": unknown field");
  }
  SystemConfig c;
  read_field(j, "num_aps", c.num_aps);
  read_field(j, "antennas_per_ap", c.antennas_per_ap);
  read_field(j, "num_devices", c.num_devices);
  read_field(j, "sig_len", c.sig_len);
  read_field(j, "max_delay", c.max_delay);
  read_field(j, "area_side", c.area_side);
  read_field(j, "activity_ratio", c.activity_ratio);
  read_field(j, "noise_power_dbm", c.noise_power_dbm);
  read_field(j, "max_tx_power_dbm", c.max_tx_power_dbm);
  read_field(j, "pathloss_intercept_db", c.pathloss_intercept_db);
  read_field(j, "pathloss_slope_db_per_decade", c.pathloss_slope_db_per_decade);
  read_field(j, "shadow_std_db", c.shadow_std_db);
  read_field(j, "power_percentile", c.power_percentile);
  read_field(j, "rng_seed", c.rng_seed);
  if (j.contains("target_snr_db") && !j["target_snr_db"].is_null()) {
    double snr = 0.0;
    read_field(j, "target_snr_db", snr);
    c.target_snr_db = snr;
  }
  return c;
}

json to_json(const Scenario& sc) {
  json sigs = json::array();
  for (const auto& s : sc.signatures) sigs.push_back(to_json(s));
  return {
      {"ap_positions", points(sc.ap_positions)},
      {"device_positions", points(sc.device_positions)},
      {"gains", rmat(sc.gains)},
      {"powers", rvec(sc.powers)},
      {"noise_var", rvec(sc.noise_var)},
      {"signatures", std::move(sigs)},
      {"active", sc.active},
      {"delays", sc.delays},
      {"max_delay", sc.max_delay},
  };
}

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  sc.ap_positions = points_from(j.at("ap_positions"));
  sc.device_positions = points_from(j.at("device_positions"));
  sc.gains = rmat_from(j.at("gains"));
  sc.powers = rvec_from(j.at("powers"));
  sc.noise_var = rvec_from(j.at("noise_var"));
  for (const auto& s : j.at("signatures")) sc.signatures.push_back(cvec_from_json(s));
  sc.active = j.at("active").get<std::vector<int>>();
  sc.delays = j.at("delays").get<std::vector<int>>();
  sc.max_delay = j.at("max_delay").get<int>();
  return sc;
}

json to_json(const ReceivedData& d) {
  json Y = json::array(), R = json::array(), sigs = json::array();
  for (const auto& y : d.Y) Y.push_back(to_json(y));
  for (const auto& r : d.sample_cov) R.push_back(to_json(r));
  for (const auto& s : d.signatures) sigs.push_back(to_json(s));
  return {
      {"num_aps", d.num_aps},
      {"antennas", d.antennas},
      {"num_devices", d.num_devices},
      {"sig_len", d.sig_len},
      {"max_delay", d.max_delay},
      {"Y", std::move(Y)},
      {"sample_cov", std::move(R)},
      {"signatures", std::move(sigs)},
      {"pg", rmat(d.pg)},
      {"noise_var", rvec(d.noise_var)},
  };
}

ReceivedData received_from_json(const json& j) {
  ReceivedData d;
  d.num_aps = j.at("num_aps").get<int>();
  d.antennas = j.at("antennas").get<int>();
  d.num_devices = j.at("num_devices").get<int>();
  d.sig_len = j.at("sig_len").get<int>();
  d.max_delay = j.at("max_delay").get<int>();
  for (const auto& y : j.at("Y")) d.Y.push_back(cmat_from_json(y));
  for (const auto& r : j.at("sample_cov")) d.sample_cov.push_back(cmat_from_json(r));
  for (const auto& s : j.at("signatures")) d.signatures.push_back(cvec_from_json(s));
  d.pg = rmat_from(j.at("pg"));
  d.noise_var = rvec_from(j.at("noise_var"));
  return d;
}

}  // namespace asyncact
