#include "cellfree/scenario.hpp"

#include <cmath>
#include <string>

namespace cellfree {

void NetworkConfig::validate() const {
  if (L < 1) throw ConfigError("network.L", "must be >= 1");
  if (N < 1) throw ConfigError("network.N", "must be >= 1");
  if (K < 1) throw ConfigError("network.K", "must be >= 1");
  if (!(area_side > 0)) throw ConfigError("network.area_side", "must be > 0");
  if (!(ap_height_delta >= 0))
    throw ConfigError("network.ap_height_delta", "must be >= 0");
  if (!(bandwidth_hz > 0))
    throw ConfigError("network.bandwidth_hz", "must be > 0");
  if (!(shadow_std_db >= 0))
    throw ConfigError("network.shadow_std_db", "must be >= 0");
  if (!(shadow_corr_distance_m > 0))
    throw ConfigError("network.shadow_corr_distance_m", "must be > 0");
  if (!(sum_power_watt > 0))
    throw ConfigError("network.sum_power_watt", "must be > 0");
  if (!std::isfinite(power_exponent))
    throw ConfigError("network.power_exponent", "must be finite");
  const int side = static_cast<int>(std::lround(std::sqrt(double(L))));
  if (side * side != L)
    throw ConfigError("network.L", "must be a perfect square (AP grid)");
}

std::vector<Point> place_aps(int L, double area_side) {
  const int side = static_cast<int>(std::lround(std::sqrt(double(L))));
  if (L < 1 || side * side != L)
    throw NonSquareApCount("AP count " + std::to_string(L) +
                           " is not a perfect square");
  const double pitch = area_side / side;
  std::vector<Point> out;
  out.reserve(L);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      out.push_back({(i + 0.5) * pitch, (j + 0.5) * pitch});
  return out;
}

double channel_gain_db(double d2_m, double height_delta_m, double shadow_db,
                       double noise_dbm, double pl_slope_db,
                       double pl_intercept_db) {
  const double d3 = std::hypot(d2_m, height_delta_m);
  return -pl_slope_db * std::log10(d3) - pl_intercept_db + shadow_db -
         noise_dbm;
}

double noise_power_dbm(double bandwidth_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

RMatrix shadow_covariance(std::span<const Point> ue_positions, double rho,
                          double corr_dist) {
  const auto K = static_cast<Eigen::Index>(ue_positions.size());
  RMatrix cov(K, K);
  const double var = rho * rho;
  for (Eigen::Index k = 0; k < K; ++k) {
    cov(k, k) = var;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double d = std::hypot(ue_positions[k].x - ue_positions[i].x,
                                  ue_positions[k].y - ue_positions[i].y);
      cov(k, i) = cov(i, k) = var * std::exp2(-d / corr_dist);
    }
  }
  return cov;
}

RMatrix shadow_cholesky(const RMatrix& cov) {
  const auto K = cov.rows();
  const double var = cov.diagonal().maxCoeff();
  if (var == 0.0) return RMatrix::Zero(K, K);
  for (double jitter = 1e-10; jitter <= 1e-4 * (1 + 1e-9); jitter *= 10) {
    RMatrix m = cov;
    m.diagonal().array() += jitter * var;
    Eigen::LLT<RMatrix> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw CholeskyFailure("shadow covariance not positive definite after jitter");
}

RVector fractional_power_allocation(const RMatrix& gains, double sum_power,
                                    double exponent) {
  const RVector aggregate = gains.colwise().sum().transpose();
  const RVector a = aggregate.array().pow(exponent);
  return sum_power * a / a.sum();
}

RMatrix compute_gains(const NetworkConfig& cfg,
                      std::span<const Point> ap_positions,
                      std::span<const Point> ue_positions,
                      const RMatrix& shadow_db) {
  const double noise = noise_power_dbm(cfg.bandwidth_hz, cfg.noise_figure_db);
  const auto L = static_cast<Eigen::Index>(ap_positions.size());
  const auto K = static_cast<Eigen::Index>(ue_positions.size());
  RMatrix gains(L, K);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double d2 = std::hypot(ap_positions[l].x - ue_positions[k].x,
                                   ap_positions[l].y - ue_positions[k].y);
      const double db =
          channel_gain_db(d2, cfg.ap_height_delta, shadow_db(l, k), noise,
                          cfg.pl_slope_db, cfg.pl_intercept_db);
      gains(l, k) = std::pow(10.0, (db + kDbmPerDbw) / 10.0);
    }
  }
  return gains;
}

Scenario build_scenario(const NetworkConfig& cfg, Rng& rng) {
  cfg.validate();
  Scenario s;
  s.N = cfg.N;
  s.ap_positions = place_aps(cfg.L, cfg.area_side);

  std::uniform_real_distribution<double> coord(0.0, cfg.area_side);
  s.ue_positions.resize(cfg.K);
  for (auto& ue : s.ue_positions) {
    ue.x = coord(rng);
    ue.y = coord(rng);
  }

  const RMatrix chol = shadow_cholesky(shadow_covariance(
      s.ue_positions, cfg.shadow_std_db, cfg.shadow_corr_distance_m));
  std::normal_distribution<double> normal;
  RMatrix shadow(cfg.L, cfg.K);
  RVector w(cfg.K);
  for (int l = 0; l < cfg.L; ++l) {
    for (int k = 0; k < cfg.K; ++k) w(k) = normal(rng);
    shadow.row(l) = (chol * w).transpose();
  }

  s.gains = compute_gains(cfg, s.ap_positions, s.ue_positions, shadow);
  s.p = fractional_power_allocation(s.gains, cfg.sum_power_watt,
                                    cfg.power_exponent);
  s.sigma = RVector::Ones(cfg.L);
  return s;
}

Scenario scenario_from_gains(int N, RMatrix gains, double sum_power,
                             double exponent) {
  Scenario s;
  s.N = N;
  s.p = fractional_power_allocation(gains, sum_power, exponent);
  s.sigma = RVector::Ones(gains.rows());
  s.gains = std::move(gains);
  return s;
}

}  // namespace cellfree
