#include "cellfree/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

namespace cellfree {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
}

const json& require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  return v;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

long long get_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<long long>();
}

int get_int(const json& v, const std::string& path) {
  const long long x = get_integer(v, path);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError(path, "integer out of range");
  return static_cast<int>(x);
}

NetworkConfig parse_network(const json& obj) {
  require_object(obj, "network");
  reject_unknown(obj, "network",
                 {"L", "N", "K", "area_side", "ap_height_delta",
                  "bandwidth_hz", "noise_figure_db", "shadow_std_db",
                  "shadow_corr_distance_m", "sum_power_watt", "pl_slope_db",
                  "pl_intercept_db", "power_exponent"});
  NetworkConfig n;
  auto num = [&](const char* key, double& out) {
    if (obj.contains(key)) out = get_number(obj[key], std::string("network.") + key);
  };
  auto integer = [&](const char* key, int& out) {
    if (obj.contains(key)) out = get_int(obj[key], std::string("network.") + key);
  };
  integer("L", n.L);
  integer("N", n.N);
  integer("K", n.K);
  num("area_side", n.area_side);
  num("ap_height_delta", n.ap_height_delta);
  num("bandwidth_hz", n.bandwidth_hz);
  num("noise_figure_db", n.noise_figure_db);
  num("shadow_std_db", n.shadow_std_db);
  num("shadow_corr_distance_m", n.shadow_corr_distance_m);
  num("sum_power_watt", n.sum_power_watt);
  num("pl_slope_db", n.pl_slope_db);
  num("pl_intercept_db", n.pl_intercept_db);
  num("power_exponent", n.power_exponent);
  return n;
}

AgingSpec parse_aging(const json& obj) {
  require_object(obj, "aging");
  reject_unknown(obj, "aging", {"r", "doppler_hz", "delay_s"});
  AgingSpec a;
  if (obj.contains("r")) {
    const json& r = obj["r"];
    if (r.is_number()) {
      a.r = r.get<double>();
    } else if (r.is_array() && !r.empty()) {
      const auto rows = static_cast<Eigen::Index>(r.size());
      if (!r[0].is_array() || r[0].empty())
        throw ConfigError("aging.r", "expected a number or an L x K array");
      const auto cols = static_cast<Eigen::Index>(r[0].size());
      RMatrix m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const std::string row_path = "aging.r[" + std::to_string(i) + "]";
        if (!r[i].is_array() || static_cast<Eigen::Index>(r[i].size()) != cols)
          throw ConfigError(row_path, "ragged matrix");
        for (Eigen::Index j = 0; j < cols; ++j)
          m(i, j) = get_number(r[i][j], row_path + "[" + std::to_string(j) + "]");
      }
      a.r_matrix = std::move(m);
    } else {
      throw ConfigError("aging.r", "expected a number or an L x K array");
    }
  }
  if (obj.contains("doppler_hz"))
    a.doppler_hz = get_number(obj["doppler_hz"], "aging.doppler_hz");
  if (obj.contains("delay_s"))
    a.delay_s = get_number(obj["delay_s"], "aging.delay_s");

  const bool direct = a.r || a.r_matrix;
  const bool clarke = a.doppler_hz || a.delay_s;
  if (direct == clarke)
    throw ConfigError("aging", "give either r or (doppler_hz, delay_s)");
  if (clarke && !(a.doppler_hz && a.delay_s))
    throw ConfigError("aging", "Clarke model needs both doppler_hz and delay_s");
  return a;
}

}  // namespace

Aging AgingSpec::resolve(int L, int K) const {
  Aging out;
  if (r) {
    out.r = RMatrix::Constant(L, K, *r);
  } else if (r_matrix) {
    if (r_matrix->rows() != L || r_matrix->cols() != K)
      throw ConfigError("aging.r", "matrix must be L x K");
    out.r = *r_matrix;
  } else if (doppler_hz && delay_s) {
    out.r = RMatrix::Constant(L, K,
                              clarke_autocorrelation(*doppler_hz, *delay_s, 1.0));
  } else {
    throw ConfigError("aging", "no autocorrelation given");
  }
  out.validate();
  return out;
}

void ExperimentConfig::validate() const {
  network.validate();
  aging.resolve(network.L, network.K);
  if (schemes.empty()) throw ConfigError("schemes", "must be non-empty");
  if (drops < 1) throw ConfigError("drops", "must be >= 1");
  if (realizations_per_drop < 2)
    throw ConfigError("realizations_per_drop", "must be >= 2");
  if (pi_samples < 1) throw ConfigError("pi_samples", "must be >= 1");
  if (output_path.empty()) throw ConfigError("output_path", "must be non-empty");
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "<root>");
  reject_unknown(doc, "",
                 {"network", "aging", "schemes", "drops",
                  "realizations_per_drop", "pi_samples", "master_seed",
                  "output_path"});
  for (const char* key : {"aging", "schemes", "drops", "realizations_per_drop",
                          "master_seed"})
    if (!doc.contains(key)) throw ConfigError(key, "missing required key");

  ExperimentConfig cfg;
  if (doc.contains("network")) cfg.network = parse_network(doc["network"]);
  cfg.aging = parse_aging(doc["aging"]);

  const json& schemes = doc["schemes"];
  if (!schemes.is_array()) throw ConfigError("schemes", "expected an array");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const std::string path = "schemes[" + std::to_string(i) + "]";
    if (!schemes[i].is_string()) throw ConfigError(path, "expected a string");
    const auto s = scheme_from_string(schemes[i].get<std::string>());
    if (!s) throw ConfigError(path, "unknown scheme '" + schemes[i].get<std::string>() + "'");
    if (std::find(cfg.schemes.begin(), cfg.schemes.end(), *s) != cfg.schemes.end())
      throw ConfigError(path, "duplicate scheme");
    cfg.schemes.push_back(*s);
  }

  cfg.drops = get_int(doc["drops"], "drops");
  cfg.realizations_per_drop =
      get_int(doc["realizations_per_drop"], "realizations_per_drop");
  if (doc.contains("pi_samples"))
    cfg.pi_samples = get_int(doc["pi_samples"], "pi_samples");
  const long long seed = get_integer(doc["master_seed"], "master_seed");
  if (seed < 0) throw ConfigError("master_seed", "must be >= 0");
  cfg.master_seed = static_cast<std::uint64_t>(seed);
  if (doc.contains("output_path")) {
    if (!doc["output_path"].is_string())
      throw ConfigError("output_path", "expected a string");
    cfg.output_path = doc["output_path"].get<std::string>();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  const NetworkConfig& n = cfg.network;
  json net = {{"L", n.L},
              {"N", n.N},
              {"K", n.K},
              {"area_side", n.area_side},
              {"ap_height_delta", n.ap_height_delta},
              {"bandwidth_hz", n.bandwidth_hz},
              {"noise_figure_db", n.noise_figure_db},
              {"shadow_std_db", n.shadow_std_db},
              {"shadow_corr_distance_m", n.shadow_corr_distance_m},
              {"sum_power_watt", n.sum_power_watt},
              {"pl_slope_db", n.pl_slope_db},
              {"pl_intercept_db", n.pl_intercept_db},
              {"power_exponent", n.power_exponent}};
  json aging = json::object();
  if (cfg.aging.r) aging["r"] = *cfg.aging.r;
  if (cfg.aging.r_matrix) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < cfg.aging.r_matrix->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < cfg.aging.r_matrix->cols(); ++j)
        row.push_back((*cfg.aging.r_matrix)(i, j));
      rows.push_back(row);
    }
    aging["r"] = rows;
  }
  if (cfg.aging.doppler_hz) aging["doppler_hz"] = *cfg.aging.doppler_hz;
  if (cfg.aging.delay_s) aging["delay_s"] = *cfg.aging.delay_s;
  json schemes = json::array();
  for (Scheme s : cfg.schemes) schemes.push_back(std::string(to_string(s)));
  return {{"network", net},
          {"aging", aging},
          {"schemes", schemes},
          {"drops", cfg.drops},
          {"realizations_per_drop", cfg.realizations_per_drop},
          {"pi_samples", cfg.pi_samples},
          {"master_seed", cfg.master_seed},
          {"output_path", cfg.output_path}};
}

}  // namespace cellfree
