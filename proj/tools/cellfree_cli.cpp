// cellfree: command-line front end of the delayed-CSI precoding simulator.
//
//   cellfree run <config.json> [--workers N] [--output rates.csv]
//   cellfree cdf <rates.csv> [--out-dir DIR]
//   cellfree verify
//   cellfree scenario <config.json> [--drop I]
//
// Exit codes: 0 ok, 1 usage/config error, 2 runtime failure, 3 verification
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellfree/experiment.hpp"
#include "cellfree/oracle.hpp"

namespace fs = std::filesystem;
using namespace cellfree;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

fs::path summary_path_for(const fs::path& rates) {
  fs::path out = rates;
  out.replace_extension(".summary.json");
  return out;
}

int cmd_run(const std::string& config_path, std::optional<int> workers,
            const std::string& output_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!output_override.empty()) cfg.output_path = output_override;
  const int n_workers = resolve_workers(workers);

  const ExperimentResult result = run_experiment(cfg, n_workers);

  const fs::path rates_path = cfg.output_path;
  if (rates_path.has_parent_path())
    fs::create_directories(rates_path.parent_path());
  {
    std::ofstream out(rates_path, std::ios::binary);
    write_rates_csv(out, result.records);
    if (!out) throw Error("cannot write " + rates_path.string());
  }
  const nlohmann::json summary = summary_json(cfg, result);
  {
    std::ofstream out(summary_path_for(rates_path), std::ios::binary);
    out << summary.dump(2) << '\n';
    if (!out) throw Error("cannot write summary");
  }

  std::cout << "wrote " << rates_path.string() << " and "
            << summary_path_for(rates_path).string() << " (" << n_workers
            << " workers)\n";
  for (const SchemeSummary& s : result.summary)
    std::cout << "  " << to_string(s.scheme) << ": median "
              << (s.count ? s.percentiles[2] : NAN) << " bit/s/Hz, p10 "
              << (s.count ? s.percentiles[0] : NAN) << ", mse "
              << s.mse_objective << '\n';
  if (result.realizations_skipped > 0)
    std::cout << "  skipped " << result.realizations_skipped << " of "
              << result.realizations_total << " realizations\n";
  if (result.skip_rate() > kMaxSkipRate) {
    std::cerr << "error: skip rate " << result.skip_rate()
              << " exceeds " << kMaxSkipRate << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_cdf(const std::string& rates_path, const std::string& out_dir) {
  std::ifstream in(rates_path);
  if (!in) throw Error("cannot open " + rates_path);
  const auto records = read_rates_csv(in);
  if (records.empty()) throw EmptySampleSet(rates_path + " has no records");
  const fs::path dir = out_dir.empty()
                           ? fs::path(rates_path).parent_path()
                           : fs::path(out_dir);
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = fs::path(rates_path).stem().string();
  for (const auto& [scheme, cdf] : aggregate_cdf(records)) {
    const fs::path out_path =
        dir / (stem + ".cdf." + std::string(to_string(scheme)) + ".csv");
    std::ofstream out(out_path, std::ios::binary);
    write_cdf_csv(out, cdf);
    if (!out) throw Error("cannot write " + out_path.string());
    std::cout << out_path.string() << '\n';
  }
  return kExitOk;
}

int cmd_verify() {
  bool ok = true;
  for (const auto& check : oracle::run_verification()) {
    std::cout << (check.passed ? "PASS  " : "FAIL  ") << check.name;
    if (!check.detail.empty()) std::cout << "  (" << check.detail << ')';
    std::cout << '\n';
    ok = ok && check.passed;
  }
  return ok ? kExitOk : kExitVerify;
}

nlohmann::json matrix_json(const RMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

int cmd_scenario(const std::string& config_path, int drop) {
  const ExperimentConfig cfg = load_config(config_path);
  Rng rng = derive_stream({cfg.master_seed, static_cast<std::uint64_t>(drop),
                           0, 0, Purpose::Geometry});
  const Scenario s = build_scenario(cfg.network, rng);
  const Aging aging = cfg.aging.resolve(s.num_aps(), s.num_ues());
  auto points = [](const std::vector<Point>& pts) {
    nlohmann::json out = nlohmann::json::array();
    for (const Point& p : pts) out.push_back({p.x, p.y});
    return out;
  };
  const nlohmann::json doc = {
      {"drop_id", drop},
      {"N", s.N},
      {"ap_positions", points(s.ap_positions)},
      {"ue_positions", points(s.ue_positions)},
      {"gains", matrix_json(s.gains)},
      {"gains_db", matrix_json((10.0 * s.gains.array().log10()).matrix())},
      {"p", std::vector<double>(s.p.data(), s.p.data() + s.p.size())},
      {"sigma", std::vector<double>(s.sigma.data(), s.sigma.data() + s.sigma.size())},
      {"r", matrix_json(aging.r)}};
  std::cout << doc.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Team MMSE precoding under delayed CSI sharing"};
  app.require_subcommand(1);

  std::string run_config, run_output;
  int run_workers = 0;
  auto* run = app.add_subcommand("run", "simulate and write rates CSV + summary JSON");
  run->add_option("config", run_config, "experiment JSON")->required();
  run->add_option("-w,--workers", run_workers,
                  std::string("worker threads (default: $") + kWorkersEnv +
                      " or all cores)");
  run->add_option("-o,--output", run_output, "override output_path");

  std::string cdf_input, cdf_dir;
  auto* cdf = app.add_subcommand("cdf", "per-scheme CDF CSVs from a rates CSV");
  cdf->add_option("rates", cdf_input, "rates CSV from `run`")->required();
  cdf->add_option("-d,--out-dir", cdf_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "finite-oracle and invariant checks");

  std::string scen_config;
  int scen_drop = 0;
  auto* scen = app.add_subcommand("scenario", "dump one drop's gains and powers");
  scen->add_option("config", scen_config, "experiment JSON")->required();
  scen->add_option("--drop", scen_drop, "drop index")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run)
      return cmd_run(run_config,
                     run_workers > 0 ? std::optional<int>(run_workers) : std::nullopt,
                     run_output);
    if (*cdf) return cmd_cdf(cdf_input, cdf_dir);
    if (*verify) return cmd_verify();
    if (*scen) return cmd_scenario(scen_config, scen_drop);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
