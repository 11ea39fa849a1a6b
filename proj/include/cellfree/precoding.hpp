#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cellfree/channel.hpp"
#include "cellfree/common.hpp"
#include "cellfree/scenario.hpp"
#include "cellfree/seeding.hpp"

namespace cellfree {

enum class Scheme { TeamMmse, LocalTmmse, Centralized, Naive, StructureAware };

inline constexpr std::array<Scheme, 5> kAllSchemes = {
    Scheme::TeamMmse, Scheme::LocalTmmse, Scheme::Centralized, Scheme::Naive,
    Scheme::StructureAware};

std::string_view to_string(Scheme s);
std::optional<Scheme> scheme_from_string(std::string_view name);

/// Joint precoder T stacked as (L*N) x K; block l is what AP l applies.
struct PrecoderSet {
  Scheme scheme = Scheme::TeamMmse;
  int N = 1;
  CMatrix t;

  auto block(int l) const { return t.middleRows(l * N, N); }
};

/// Second-stage coefficients of the two-stage precoder T_l = F_l C_l.
/// `pi[l]` is the (conditional or approximate) mean of P^1/2 H_l^H F_l and
/// `c[l]` solves C_l + sum_{j != l} pi[j] C_j = I.
struct TeamStages {
  std::vector<CMatrix> pi;
  std::vector<CMatrix> c;
};

/// Condition-number guard applied to every stage inversion.
inline constexpr double kMaxStageCondition = 1e12;

/// F_l = (H_l P H_l^H + sigma_l I_N)^-1 H_l P^1/2.
CMatrix local_mmse_stage(const Eigen::Ref<const CMatrix>& h_block,
                         const RVector& p, double sigma);

/// P^1/2 H^H F(H), the K x K effective channel after local MMSE precoding.
/// Hermitian PSD with eigenvalues in [0, 1).
CMatrix effective_channel(const Eigen::Ref<const CMatrix>& h_block,
                          const RVector& p, double sigma);

/// Monte-Carlo estimate of E[P^1/2 H_l^H F_l | H_l[t-d] = z_block] from
/// `samples` conditional draws, Hermitian-symmetrized.
CMatrix estimate_pi(const Eigen::Ref<const CMatrix>& z_block,
                    const Scenario& s, const Aging& aging, int ap, int samples,
                    Rng& rng);

/// Solves C_l + sum_{j != l} Pi_j C_j = I_K for all l in O(L K^3):
///   C_l = (I - Pi_l)^-1 (I + G)^-1,  G = sum_l Pi_l (I - Pi_l)^-1.
/// Throws SingularStage when I - Pi_l or I + G is too ill-conditioned.
std::vector<CMatrix> solve_team_stages(std::span<const CMatrix> pi);

/// Sum over UEs of p_k (1 - r_lk^2) g_lk: the per-antenna prediction error
/// power of AP l's block.
double prediction_error_power(const Scenario& s, const Aging& aging, int ap);

/// Team stages from delayed CSI only; AP l draws its conditional samples from
/// the stream `base.with_ap(l).with_purpose(Purpose::PiSampling)`.
TeamStages team_stages(const CMatrix& past, const Scenario& s,
                       const Aging& aging, int samples, const SeedPath& base);

/// T_l = F_l(H_l[t]) C_l for every AP.
PrecoderSet apply_stages(Scheme scheme, const CMatrix& now, const Scenario& s,
                         std::span<const CMatrix> c);

PrecoderSet team_mmse_precoder(const ChannelPair& pair, const Scenario& s,
                               const Aging& aging, int samples,
                               const SeedPath& base);

/// Deterministic stages from unconditional means of P^1/2 H_j^H F_j, each
/// averaged over `samples` marginal draws. Computed once per drop.
TeamStages local_tmmse_stages(const Scenario& s, int samples,
                              const SeedPath& base);

PrecoderSet local_tmmse_precoder(const ChannelPair& pair, const Scenario& s,
                                 const TeamStages& stages);

PrecoderSet local_tmmse_precoder(const ChannelPair& pair, const Scenario& s,
                                 int samples, const SeedPath& base);

/// Delay-tolerant centralized MMSE on the predicted channel r * H[t-d].
PrecoderSet centralized_precoder(const ChannelPair& pair, const Scenario& s,
                                 const Aging& aging);

/// Each AP solves the centralized problem with its own predicted block
/// replaced by its timely local channel, and keeps its own rows.
PrecoderSet naive_precoder(const ChannelPair& pair, const Scenario& s,
                           const Aging& aging);

/// Closed-form approximation of AP l's coefficient from its predicted block.
CMatrix structure_aware_pi(const Eigen::Ref<const CMatrix>& past_block,
                           const Scenario& s, const Aging& aging, int ap);

PrecoderSet structure_aware_precoder(const ChannelPair& pair,
                                     const Scenario& s, const Aging& aging);

/// Builds any scheme's precoder for the realizations of one drop. Local team
/// stages are computed once at construction when that scheme is requested.
/// Realization i of the drop uses `drop_base.with_realization(i)` for its
/// conditional samples.
class PrecoderFactory {
 public:
  PrecoderFactory(const Scenario& s, const Aging& aging, int pi_samples,
                  const SeedPath& drop_base, std::span<const Scheme> schemes);

  PrecoderSet build(Scheme scheme, const ChannelPair& pair,
                    std::uint64_t realization) const;

 private:
  const Scenario& scenario_;
  const Aging& aging_;
  int pi_samples_;
  SeedPath base_;
  std::optional<TeamStages> local_stages_;
};

}  // namespace cellfree
