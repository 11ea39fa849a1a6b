#pragma once

#include <span>
#include <vector>

#include "cellfree/common.hpp"
#include "cellfree/seeding.hpp"

namespace cellfree {

/// Large-scale network parameters. Defaults are the 16-AP, 50-UE urban setup
/// (0.5 km square, 2 GHz 3GPP-like path loss, 20 MHz, 5 W sum power).
struct NetworkConfig {
  int L = 16;
  int N = 4;
  int K = 50;
  double area_side = 500.0;         // m
  double ap_height_delta = 10.0;    // m
  double bandwidth_hz = 20e6;
  double noise_figure_db = 7.0;
  double shadow_std_db = 4.0;           // rho
  double shadow_corr_distance_m = 9.0;  // half-correlation distance
  double sum_power_watt = 5.0;
  double pl_slope_db = 36.7;
  double pl_intercept_db = 30.5;
  double power_exponent = -1.0;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

/// Static per-drop state. `gains(l, k)` is the linear SNR-per-watt gain
/// between AP l and UE k (noise already absorbed).
struct Scenario {
  int N = 1;
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  RMatrix gains;  // L x K
  RVector p;      // K virtual uplink powers, sum = P
  RVector sigma;  // L regularization parameters

  int num_aps() const { return static_cast<int>(gains.rows()); }
  int num_ues() const { return static_cast<int>(gains.cols()); }
};

std::vector<Point> place_aps(int L, double area_side);

double channel_gain_db(double d2_m, double height_delta_m, double shadow_db,
                       double noise_dbm, double pl_slope_db = 36.7,
                       double pl_intercept_db = 30.5);

double noise_power_dbm(double bandwidth_hz, double noise_figure_db);

/// K x K covariance rho^2 * 2^(-dist/corr_dist) of one AP's shadowing vector.
RMatrix shadow_covariance(std::span<const Point> ue_positions, double rho,
                          double corr_dist);

/// Lower Cholesky factor of `cov`, adding 1e-10*rho^2*I and escalating by 10x
/// up to 1e-4*rho^2 when the factorization fails.
RMatrix shadow_cholesky(const RMatrix& cov);

RVector fractional_power_allocation(const RMatrix& gains, double sum_power,
                                    double exponent);

/// channel_gain_db is relative to a noise power in dBm, i.e. per mW of
/// transmit power; powers are in watts.
inline constexpr double kDbmPerDbw = 30.0;

/// Linear gains (SNR per watt) for given geometry and per-(AP, UE)
/// shadowing in dB (L x K).
RMatrix compute_gains(const NetworkConfig& cfg,
                      std::span<const Point> ap_positions,
                      std::span<const Point> ue_positions,
                      const RMatrix& shadow_db);

/// Draws one user drop: uniform UEs, correlated shadowing (independent per
/// AP), gains, fractional powers and sigma = 1.
Scenario build_scenario(const NetworkConfig& cfg, Rng& rng);

/// Scenario from explicit gains with fractional power allocation; used for
/// small hand-built instances.
Scenario scenario_from_gains(int N, RMatrix gains, double sum_power,
                             double exponent = -1.0);

}  // namespace cellfree
