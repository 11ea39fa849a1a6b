#pragma once

#include <map>
#include <span>
#include <vector>

#include "cellfree/channel.hpp"
#include "cellfree/common.hpp"
#include "cellfree/precoding.hpp"

namespace cellfree {

/// ||P^1/2 H^H T - I||_F^2 + sum_l sigma_l ||T_l||_F^2 for one realization.
double mse_sample(const CMatrix& h, const CMatrix& t, const RVector& p,
                  const RVector& sigma, int N);

/// Sample average of mse_sample over paired (channel, precoder) draws, using
/// H[t] as the channel. Throws EmptySampleSet on empty input.
double mse_objective(std::span<const ChannelPair> pairs,
                     std::span<const PrecoderSet> precoders, const RVector& p,
                     const RVector& sigma);

/// Per-UE moments entering the hardening-bound SINR.
struct RateMoments {
  CVector mean_gain;  // E[h_k^H t_k]
  RVector var_gain;   // V(h_k^H t_k), unbiased
  RMatrix cross;      // cross(j, k) = E|h_j^H t_k|^2; diagonal is unused (0)
  RVector power;      // E||t_k||^2
  long count = 0;
};

/// Mergeable sums over (H, T) realizations. Merging is commutative, so
/// partial accumulators from workers combine to the same moments.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int K);

  void add(const CMatrix& h, const CMatrix& t);
  void merge(const MomentAccumulator& other);

  long count() const { return count_; }

  /// Throws InsufficientSamples when fewer than two realizations were added.
  RateMoments moments() const;

 private:
  int K_;
  long count_ = 0;
  CVector sum_gain_;
  RVector sum_gain_abs2_;
  RMatrix sum_cross_;  // sum of |h_j^H t_k|^2
  RVector sum_power_;
};

/// Draws `realizations` channel pairs for a drop (streams
/// base.with_realization(i)) and accumulates the moments of one scheme.
RateMoments estimate_rate_moments(Scheme scheme, const Scenario& s,
                                  const Aging& aging, int realizations,
                                  int pi_samples, const SeedPath& base);

RVector sinr(const RateMoments& m, const RVector& p);
RVector sinr_and_rate(const RateMoments& m, const RVector& p);

struct RateRecord {
  int drop_id = 0;
  int ue_id = 0;
  Scheme scheme = Scheme::TeamMmse;
  double rate_bits = 0.0;
};

struct CdfPoint {
  double rate = 0.0;
  double cdf = 0.0;
};

/// Sorted values with cdf = i/n; tied values keep the largest cdf.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

std::map<Scheme, std::vector<CdfPoint>> aggregate_cdf(
    std::span<const RateRecord> records);

}  // namespace cellfree
