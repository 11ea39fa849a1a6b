#include "cellfree/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cellfree {

namespace {

std::string format_g10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ExperimentResult merge_drops(const ExperimentConfig& cfg,
                             std::vector<DropResult>& drops) {
  ExperimentResult out;
  std::map<Scheme, double> mse_sum;
  long mse_count = 0;
  for (DropResult& d : drops) {
    out.realizations_total += cfg.realizations_per_drop;
    out.realizations_skipped += d.realizations_skipped;
    if (d.records.empty()) ++out.drops_skipped;
    out.records.insert(out.records.end(), d.records.begin(), d.records.end());
    for (const auto& [scheme, v] : d.mse_sum) mse_sum[scheme] += v;
    mse_count += d.mse_count;
  }

  for (Scheme scheme : cfg.schemes) {
    std::vector<double> rates;
    for (const RateRecord& r : out.records)
      if (r.scheme == scheme) rates.push_back(r.rate_bits);
    SchemeSummary s;
    s.scheme = scheme;
    s.count = rates.size();
    if (!rates.empty())
      for (std::size_t i = 0; i < kSummaryPercentiles.size(); ++i)
        s.percentiles[i] = percentile(rates, kSummaryPercentiles[i]);
    s.mse_objective = mse_count > 0 ? mse_sum[scheme] / mse_count : NAN;
    out.summary.push_back(s);
  }
  return out;
}

}  // namespace

DropResult run_drop(const ExperimentConfig& cfg, int drop_id) {
  DropResult out;
  out.drop_id = drop_id;
  const SeedPath base{cfg.master_seed, static_cast<std::uint64_t>(drop_id), 0,
                      0, Purpose::Geometry};
  Rng geometry = derive_stream(base);
  const Scenario s = build_scenario(cfg.network, geometry);
  const Aging aging = cfg.aging.resolve(s.num_aps(), s.num_ues());
  const auto n_schemes = cfg.schemes.size();

  std::optional<PrecoderFactory> factory;
  try {
    factory.emplace(s, aging, cfg.pi_samples, base, cfg.schemes);
  } catch (const SingularStage&) {
    out.realizations_skipped = cfg.realizations_per_drop;
    return out;
  }

  std::vector<MomentAccumulator> acc(n_schemes, MomentAccumulator(s.num_ues()));
  std::vector<double> mse(n_schemes, 0.0);
  std::vector<PrecoderSet> precoders(n_schemes);
  for (int i = 0; i < cfg.realizations_per_drop; ++i) {
    Rng rng = derive_stream(base.with_realization(i).with_purpose(Purpose::Channel));
    const ChannelPair pair = sample_pair(s, aging, rng);
    try {
      for (std::size_t j = 0; j < n_schemes; ++j)
        precoders[j] = factory->build(cfg.schemes[j], pair, i);
    } catch (const SingularStage&) {
      ++out.realizations_skipped;
      continue;
    }
    for (std::size_t j = 0; j < n_schemes; ++j) {
      acc[j].add(pair.now, precoders[j].t);
      mse[j] += mse_sample(pair.now, precoders[j].t, s.p, s.sigma, s.N);
    }
    ++out.mse_count;
  }
  if (out.mse_count < 2) return out;

  for (std::size_t j = 0; j < n_schemes; ++j) {
    out.mse_sum[cfg.schemes[j]] = mse[j];
    const RVector rates = sinr_and_rate(acc[j].moments(), s.p);
    for (int k = 0; k < s.num_ues(); ++k)
      out.records.push_back({drop_id, k, cfg.schemes[j], rates(k)});
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers) {
  std::vector<DropResult> drops(cfg.drops);
  std::vector<std::exception_ptr> errors(cfg.drops);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int d = 0; d < cfg.drops; ++d) {
    try {
      drops[d] = run_drop(cfg, d);
    } catch (...) {
      errors[d] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return merge_drops(cfg, drops);
}

ExperimentResult run_experiment_serial(const ExperimentConfig& cfg) {
  std::vector<DropResult> drops;
  drops.reserve(cfg.drops);
  for (int d = 0; d < cfg.drops; ++d) drops.push_back(run_drop(cfg, d));
  return merge_drops(cfg, drops);
}

int resolve_workers(std::optional<int> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptySampleSet("percentile of no values");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void write_rates_csv(std::ostream& out, const std::vector<RateRecord>& records) {
  out << "drop_id,ue_id,scheme,rate_bits_per_hz\n";
  for (const RateRecord& r : records)
    out << r.drop_id << ',' << r.ue_id << ',' << to_string(r.scheme) << ','
        << format_g10(r.rate_bits) << '\n';
}

std::vector<RateRecord> read_rates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "drop_id,ue_id,scheme,rate_bits_per_hz")
    throw Error("rates CSV line 1: unexpected header");
  std::vector<RateRecord> out;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string drop, ue, scheme, rate;
    if (!std::getline(row, drop, ',') || !std::getline(row, ue, ',') ||
        !std::getline(row, scheme, ',') || !std::getline(row, rate))
      throw Error("rates CSV line " + std::to_string(line_no) +
                  ": expected 4 fields");
    RateRecord r;
    try {
      std::size_t used = 0;
      r.drop_id = std::stoi(drop, &used);
      if (used != drop.size()) throw std::invalid_argument("drop_id");
      r.ue_id = std::stoi(ue, &used);
      if (used != ue.size()) throw std::invalid_argument("ue_id");
      r.rate_bits = std::stod(rate, &used);
      if (used != rate.size()) throw std::invalid_argument("rate");
    } catch (const std::exception&) {
      throw Error("rates CSV line " + std::to_string(line_no) +
                  ": malformed number");
    }
    const auto s = scheme_from_string(scheme);
    if (!s)
      throw Error("rates CSV line " + std::to_string(line_no) +
                  ": unknown scheme '" + scheme + "'");
    r.scheme = *s;
    out.push_back(r);
  }
  return out;
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf) {
  out << "rate_bits_per_hz,cdf\n";
  for (const CdfPoint& p : cdf)
    out << format_g10(p.rate) << ',' << format_g10(p.cdf) << '\n';
}

nlohmann::json summary_json(const ExperimentConfig& cfg,
                            const ExperimentResult& result) {
  nlohmann::json schemes = nlohmann::json::object();
  for (const SchemeSummary& s : result.summary) {
    nlohmann::json pct = nlohmann::json::object();
    for (std::size_t i = 0; i < kSummaryPercentiles.size(); ++i)
      pct["p" + std::to_string(static_cast<int>(kSummaryPercentiles[i]))] =
          s.count ? nlohmann::json(s.percentiles[i]) : nlohmann::json(nullptr);
    schemes[std::string(to_string(s.scheme))] = {
        {"count", s.count},
        {"percentiles", pct},
        {"mse_objective", std::isfinite(s.mse_objective)
                              ? nlohmann::json(s.mse_objective)
                              : nlohmann::json(nullptr)}};
  }
  return {{"config", to_json(cfg)},
          {"records", result.records.size()},
          {"realizations_total", result.realizations_total},
          {"realizations_skipped", result.realizations_skipped},
          {"drops_skipped", result.drops_skipped},
          {"skip_rate", result.skip_rate()},
          {"schemes", schemes}};
}

}  // namespace cellfree
