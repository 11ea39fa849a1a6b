#include "cellfree/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cellfree {

namespace {

// Circular CN(0, 1): independent real and imaginary parts of variance 1/2.
class ComplexNormal {
 public:
  cd operator()(Rng& rng) {
    const double re = normal_(rng);
    const double im = normal_(rng);
    return {re, im};
  }

 private:
  std::normal_distribution<double> normal_{0.0, std::numbers::sqrt2 / 2};
};

}  // namespace

Aging Aging::uniform(int L, int K, double r) {
  Aging a{RMatrix::Constant(L, K, r)};
  a.validate();
  return a;
}

void Aging::validate() const {
  if (r.size() == 0) throw ConfigError("aging.r", "empty");
  if ((r.array() < 0.0).any() || (r.array() > 1.0).any() || !r.allFinite())
    throw ConfigError("aging.r", "autocorrelation must lie in [0, 1]");
}

ChannelPair sample_pair(const Scenario& s, const Aging& aging, Rng& rng) {
  const int L = s.num_aps(), K = s.num_ues(), N = s.N;
  ChannelPair pair{N, CMatrix(L * N, K), CMatrix(L * N, K)};
  ComplexNormal standard_complex_normal;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const double amp = std::sqrt(s.gains(l, k));
      const double r = aging.r(l, k);
      const double innov = std::sqrt(1.0 - r * r);
      for (int n = 0; n < N; ++n) {
        const cd w1 = standard_complex_normal(rng);
        const cd w2 = standard_complex_normal(rng);
        const cd past = amp * w1;
        pair.past(l * N + n, k) = past;
        pair.now(l * N + n, k) = r * past + innov * amp * w2;
      }
    }
  }
  return pair;
}

CMatrix sample_conditional(const Eigen::Ref<const CMatrix>& past_block,
                           const Scenario& s, const Aging& aging, int ap,
                           Rng& rng) {
  const auto N = past_block.rows(), K = past_block.cols();
  CMatrix out(N, K);
  ComplexNormal standard_complex_normal;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double r = aging.r(ap, k);
    const double spread = std::sqrt((1.0 - r * r) * s.gains(ap, k));
    for (Eigen::Index n = 0; n < N; ++n)
      out(n, k) = r * past_block(n, k) + spread * standard_complex_normal(rng);
  }
  return out;
}

CMatrix sample_marginal(const Scenario& s, int ap, Rng& rng) {
  const int K = s.num_ues();
  CMatrix out(s.N, K);
  ComplexNormal standard_complex_normal;
  for (int k = 0; k < K; ++k) {
    const double amp = std::sqrt(s.gains(ap, k));
    for (int n = 0; n < s.N; ++n) out(n, k) = amp * standard_complex_normal(rng);
  }
  return out;
}

double clarke_autocorrelation(double doppler_hz, double symbol_time_s,
                              double delay_symbols) {
  if (doppler_hz < 0 || symbol_time_s < 0 || delay_symbols < 0)
    throw ConfigError("aging", "Clarke model inputs must be non-negative");
  const double x = 2.0 * std::numbers::pi * doppler_hz * symbol_time_s *
                   delay_symbols;
  const double r = std::clamp(std::cyl_bessel_j(0.0, x), -1.0, 1.0);
  if (r < 0.0)
    throw NegativeAutocorrelation("J0(" + std::to_string(x) +
                                  ") is negative");
  return r;
}

FiniteEnsemble finite_toy_ensemble(int L, int N, int K,
                                   std::span<const cd> alphabet, double r,
                                   std::span<const cd> error_alphabet,
                                   std::size_t max_outcomes) {
  if (alphabet.empty() || error_alphabet.empty())
    throw Error("finite ensemble needs non-empty alphabets");
  const int entries = L * N * K;
  const std::size_t a = alphabet.size(), e = error_alphabet.size();
  std::size_t n_past = 1, n_err = 1;
  for (int i = 0; i < entries; ++i) {
    n_past *= a;
    n_err *= e;
    if (n_past * n_err > max_outcomes)
      throw EnsembleTooLarge("finite ensemble exceeds " +
                             std::to_string(max_outcomes) + " outcomes");
  }

  FiniteEnsemble ens{L, N, K, {}, {}};
  ens.outcomes.reserve(n_past * n_err);
  ens.classes.resize(n_past);
  const double prob = 1.0 / static_cast<double>(n_past * n_err);

  // Mixed-radix decoding of the outcome index; entry i maps to stacked
  // position (i % (L*N), i / (L*N)) in column-major order.
  const int rows = L * N;
  for (std::size_t pi = 0; pi < n_past; ++pi) {
    CMatrix past(rows, K);
    std::size_t code = pi;
    for (int i = 0; i < entries; ++i, code /= a)
      past(i % rows, i / rows) = alphabet[code % a];
    for (std::size_t ei = 0; ei < n_err; ++ei) {
      CMatrix now(rows, K);
      std::size_t ecode = ei;
      for (int i = 0; i < entries; ++i, ecode /= e)
        now(i % rows, i / rows) =
            r * past(i % rows, i / rows) + error_alphabet[ecode % e];
      ens.classes[pi].push_back(static_cast<int>(ens.outcomes.size()));
      ens.outcomes.push_back({ChannelPair{N, past, now}, prob,
                              static_cast<int>(pi)});
    }
  }
  return ens;
}

}  // namespace cellfree
