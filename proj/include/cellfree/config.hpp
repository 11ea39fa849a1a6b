#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellfree/channel.hpp"
#include "cellfree/precoding.hpp"
#include "cellfree/scenario.hpp"

namespace cellfree {

/// Either a direct autocorrelation (scalar or L x K matrix) or Clarke's model
/// with Doppler spread and the delay product T*d in seconds.
struct AgingSpec {
  std::optional<double> r;
  std::optional<RMatrix> r_matrix;
  std::optional<double> doppler_hz;
  std::optional<double> delay_s;

  Aging resolve(int L, int K) const;
};

struct ExperimentConfig {
  NetworkConfig network;
  AgingSpec aging;
  std::vector<Scheme> schemes;
  int drops = 1;
  int realizations_per_drop = 2;
  int pi_samples = 200;
  std::uint64_t master_seed = 0;
  std::string output_path = "rates.csv";

  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the
/// key path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace cellfree
