#pragma once

#include <span>
#include <vector>

#include "cellfree/common.hpp"
#include "cellfree/scenario.hpp"
#include "cellfree/seeding.hpp"

namespace cellfree {

/// Autocorrelation coefficients r(l, k) in [0, 1] between H[t-d] and H[t].
struct Aging {
  RMatrix r;  // L x K

  static Aging uniform(int L, int K, double r);
  void validate() const;
};

/// One joint realization of (H[t-d], H[t]), each stored as the stacked
/// (L*N) x K global matrix; block l is rows [l*N, (l+1)*N).
struct ChannelPair {
  int N = 1;
  CMatrix past;
  CMatrix now;

  int num_aps() const { return static_cast<int>(past.rows()) / N; }
  auto past_block(int l) const { return past.middleRows(l * N, N); }
  auto now_block(int l) const { return now.middleRows(l * N, N); }
};

/// h_past = sqrt(g) w1, h_now = r h_past + sqrt(1 - r^2) sqrt(g) w2.
ChannelPair sample_pair(const Scenario& s, const Aging& aging, Rng& rng);

/// Draws H_l[t] given H_l[t-d]: entries CN(r * h_past, (1 - r^2) * g).
CMatrix sample_conditional(const Eigen::Ref<const CMatrix>& past_block,
                           const Scenario& s, const Aging& aging, int ap,
                           Rng& rng);

/// Draws H_l from its marginal law CN(0, g I).
CMatrix sample_marginal(const Scenario& s, int ap, Rng& rng);

/// Clarke's model r = J0(2 pi nu T d). Throws NegativeAutocorrelation when
/// J0 < 0.
double clarke_autocorrelation(double doppler_hz, double symbol_time_s,
                              double delay_symbols);

/// Exhaustive finite sample space of (H[t-d], H[t]) pairs. Every entry of
/// H[t-d] takes values in `alphabet` with equal mass, and H[t] = r H[t-d] + E
/// with E entries uniform over `error_alphabet`.
struct FiniteEnsemble {
  struct Outcome {
    ChannelPair pair;
    double probability = 0.0;
    int past_class = 0;  // index into `classes`
  };

  int L = 0, N = 0, K = 0;
  std::vector<Outcome> outcomes;
  std::vector<std::vector<int>> classes;  // outcome indices sharing H[t-d]
};

FiniteEnsemble finite_toy_ensemble(int L, int N, int K,
                                   std::span<const cd> alphabet, double r,
                                   std::span<const cd> error_alphabet,
                                   std::size_t max_outcomes = 1'000'000);

}  // namespace cellfree
