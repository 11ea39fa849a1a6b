#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "cellfree/config.hpp"
#include "cellfree/evaluation.hpp"

namespace cellfree {

inline constexpr std::array<double, 5> kSummaryPercentiles = {10, 25, 50, 75,
                                                              90};

/// Environment variable overriding the worker count.
inline constexpr const char* kWorkersEnv = "CELLFREE_WORKERS";

/// Mergeable outcome of one drop.
struct DropResult {
  int drop_id = 0;
  std::vector<RateRecord> records;  // empty when the drop was skipped
  long realizations_skipped = 0;
  std::map<Scheme, double> mse_sum;
  long mse_count = 0;  // realizations contributing to mse_sum
};

struct SchemeSummary {
  Scheme scheme = Scheme::TeamMmse;
  std::size_t count = 0;
  std::array<double, 5> percentiles{};  // at kSummaryPercentiles
  double mse_objective = 0.0;
};

struct ExperimentResult {
  std::vector<RateRecord> records;  // ordered by drop, scheme, UE
  long realizations_total = 0;
  long realizations_skipped = 0;
  int drops_skipped = 0;
  std::vector<SchemeSummary> summary;  // in config scheme order

  double skip_rate() const {
    return realizations_total == 0
               ? 0.0
               : static_cast<double>(realizations_skipped) /
                     static_cast<double>(realizations_total);
  }
};

/// Maximum fraction of skipped realizations before a run counts as failed.
inline constexpr double kMaxSkipRate = 0.01;

/// One drop: scenario, then per realization a single channel pair shared by
/// every requested scheme. A realization where any scheme throws
/// SingularStage is skipped for all schemes.
DropResult run_drop(const ExperimentConfig& cfg, int drop_id);

/// Drops processed concurrently by `workers` OpenMP threads; output is
/// identical to run_experiment_serial for any worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers);

/// Single-threaded reference loop over drops.
ExperimentResult run_experiment_serial(const ExperimentConfig& cfg);

/// Worker count from an explicit request, else kWorkersEnv, else the OpenMP
/// default.
int resolve_workers(std::optional<int> requested);

/// Linear-interpolation percentile (q in [0, 100]).
double percentile(std::vector<double> values, double q);

void write_rates_csv(std::ostream& out, const std::vector<RateRecord>& records);
std::vector<RateRecord> read_rates_csv(std::istream& in);
void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf);

nlohmann::json summary_json(const ExperimentConfig& cfg,
                            const ExperimentResult& result);

}  // namespace cellfree
