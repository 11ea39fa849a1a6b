#include "cellfree/precoding.hpp"

#include <string>

namespace cellfree {

namespace {

constexpr std::array<std::string_view, 5> kSchemeNames = {
    "team_mmse", "local_tmmse", "centralized", "naive", "structure_aware"};

CMatrix predicted_channel(const CMatrix& past, const Scenario& s,
                          const Aging& aging) {
  CMatrix hat = past;
  for (int l = 0; l < s.num_aps(); ++l)
    for (int k = 0; k < s.num_ues(); ++k)
      hat.block(l * s.N, k, s.N, 1) *= aging.r(l, k);
  return hat;
}

// (H P H^H + D)^-1 H P^1/2 with D diagonal and positive.
CMatrix regularized_inversion(const CMatrix& h, const RVector& p,
                              const RVector& diag) {
  const CMatrix hp = h * p.cwiseSqrt().asDiagonal();
  CMatrix a = hp * hp.adjoint();
  a.diagonal() += diag.cast<cd>();
  return Eigen::LLT<CMatrix>(a).solve(hp);
}

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace

std::string_view to_string(Scheme s) {
  return kSchemeNames[static_cast<std::size_t>(s)];
}

std::optional<Scheme> scheme_from_string(std::string_view name) {
  for (Scheme s : kAllSchemes)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

CMatrix local_mmse_stage(const Eigen::Ref<const CMatrix>& h_block,
                         const RVector& p, double sigma) {
  return regularized_inversion(h_block, p,
                               RVector::Constant(h_block.rows(), sigma));
}

CMatrix effective_channel(const Eigen::Ref<const CMatrix>& h_block,
                          const RVector& p, double sigma) {
  const CMatrix f = local_mmse_stage(h_block, p, sigma);
  return p.cwiseSqrt().asDiagonal() * (h_block.adjoint() * f);
}

CMatrix estimate_pi(const Eigen::Ref<const CMatrix>& z_block,
                    const Scenario& s, const Aging& aging, int ap, int samples,
                    Rng& rng) {
  if (samples < 1) throw Error("estimate_pi needs at least one sample");
  const int K = s.num_ues();
  CMatrix acc = CMatrix::Zero(K, K);
  for (int m = 0; m < samples; ++m) {
    const CMatrix h = sample_conditional(z_block, s, aging, ap, rng);
    acc += effective_channel(h, s.p, s.sigma(ap));
  }
  acc /= static_cast<double>(samples);
  return hermitian_part(acc);
}

std::vector<CMatrix> solve_team_stages(std::span<const CMatrix> pi) {
  if (pi.empty()) throw Error("solve_team_stages: no stages");
  const auto K = pi.front().rows();
  const CMatrix eye = CMatrix::Identity(K, K);
  const auto L = static_cast<double>(pi.size());
  if (pi.size() == 1) return {eye};

  // I + G = sum_l (I - Pi_l)^-1 - (L - 1) I, since Pi (I - Pi)^-1 =
  // (I - Pi)^-1 - I.
  std::vector<CMatrix> inv;
  inv.reserve(pi.size());
  CMatrix i_plus_g = -(L - 1.0) * eye;
  for (std::size_t l = 0; l < pi.size(); ++l) {
    Eigen::PartialPivLU<CMatrix> lu(eye - pi[l]);
    if (!(lu.rcond() * kMaxStageCondition >= 1.0))
      throw SingularStage("I - Pi_" + std::to_string(l) +
                          " is numerically singular");
    inv.push_back(lu.inverse());
    i_plus_g += inv.back();
  }
  Eigen::PartialPivLU<CMatrix> lu(i_plus_g);
  if (!(lu.rcond() * kMaxStageCondition >= 1.0))
    throw SingularStage("I + G is numerically singular");
  const CMatrix w = lu.inverse();  // = I - S

  std::vector<CMatrix> c;
  c.reserve(pi.size());
  for (const CMatrix& m : inv) c.push_back(m * w);
  return c;
}

double prediction_error_power(const Scenario& s, const Aging& aging, int ap) {
  const RVector err =
      (1.0 - aging.r.row(ap).array().square()).matrix().transpose();
  return (s.p.array() * err.array() *
          s.gains.row(ap).transpose().array())
      .sum();
}

TeamStages team_stages(const CMatrix& past, const Scenario& s,
                       const Aging& aging, int samples, const SeedPath& base) {
  const int L = s.num_aps();
  TeamStages out;
  out.pi.resize(L);
  // Each AP's coefficient depends on its own delayed block and stream only.
#pragma omp parallel for schedule(static)
  for (int l = 0; l < L; ++l) {
    Rng rng = derive_stream(base.with_ap(l).with_purpose(Purpose::PiSampling));
    out.pi[l] =
        estimate_pi(past.middleRows(l * s.N, s.N), s, aging, l, samples, rng);
  }
  out.c = solve_team_stages(out.pi);
  return out;
}

PrecoderSet apply_stages(Scheme scheme, const CMatrix& now, const Scenario& s,
                         std::span<const CMatrix> c) {
  PrecoderSet out{scheme, s.N, CMatrix(now.rows(), now.cols())};
  for (int l = 0; l < s.num_aps(); ++l)
    out.t.middleRows(l * s.N, s.N) =
        local_mmse_stage(now.middleRows(l * s.N, s.N), s.p, s.sigma(l)) * c[l];
  return out;
}

PrecoderSet team_mmse_precoder(const ChannelPair& pair, const Scenario& s,
                               const Aging& aging, int samples,
                               const SeedPath& base) {
  const TeamStages stages = team_stages(pair.past, s, aging, samples, base);
  return apply_stages(Scheme::TeamMmse, pair.now, s, stages.c);
}

TeamStages local_tmmse_stages(const Scenario& s, int samples,
                              const SeedPath& base) {
  if (samples < 1) throw Error("local_tmmse_stages needs at least one sample");
  const int L = s.num_aps(), K = s.num_ues();
  TeamStages out;
  out.pi.resize(L);
#pragma omp parallel for schedule(static)
  for (int l = 0; l < L; ++l) {
    Rng rng = derive_stream(base.with_ap(l).with_purpose(Purpose::LocalMeans));
    CMatrix acc = CMatrix::Zero(K, K);
    for (int m = 0; m < samples; ++m)
      acc += effective_channel(sample_marginal(s, l, rng), s.p, s.sigma(l));
    out.pi[l] = hermitian_part(acc / static_cast<double>(samples));
  }
  out.c = solve_team_stages(out.pi);
  return out;
}

PrecoderSet local_tmmse_precoder(const ChannelPair& pair, const Scenario& s,
                                 const TeamStages& stages) {
  return apply_stages(Scheme::LocalTmmse, pair.now, s, stages.c);
}

PrecoderSet local_tmmse_precoder(const ChannelPair& pair, const Scenario& s,
                                 int samples, const SeedPath& base) {
  return local_tmmse_precoder(pair, s, local_tmmse_stages(s, samples, base));
}

PrecoderSet centralized_precoder(const ChannelPair& pair, const Scenario& s,
                                 const Aging& aging) {
  const int L = s.num_aps(), N = s.N;
  RVector diag(L * N);
  for (int l = 0; l < L; ++l)
    diag.segment(l * N, N).setConstant(prediction_error_power(s, aging, l) +
                                       s.sigma(l));
  return {Scheme::Centralized, N,
          regularized_inversion(predicted_channel(pair.past, s, aging), s.p,
                                diag)};
}

PrecoderSet naive_precoder(const ChannelPair& pair, const Scenario& s,
                           const Aging& aging) {
  const int L = s.num_aps(), N = s.N;
  const CMatrix hat = predicted_channel(pair.past, s, aging);
  RVector diag(L * N);
  for (int l = 0; l < L; ++l)
    diag.segment(l * N, N).setConstant(prediction_error_power(s, aging, l) +
                                       s.sigma(l));

  PrecoderSet out{Scheme::Naive, N, CMatrix(L * N, s.num_ues())};
  for (int l = 0; l < L; ++l) {
    // AP l knows its own block exactly: no prediction error there.
    CMatrix local_view = hat;
    local_view.middleRows(l * N, N) = pair.now_block(l);
    RVector local_diag = diag;
    local_diag.segment(l * N, N).setConstant(s.sigma(l));
    out.t.middleRows(l * N, N) =
        regularized_inversion(local_view, s.p, local_diag).middleRows(l * N, N);
  }
  return out;
}

CMatrix structure_aware_pi(const Eigen::Ref<const CMatrix>& past_block,
                           const Scenario& s, const Aging& aging, int ap) {
  CMatrix hat = past_block;
  for (int k = 0; k < s.num_ues(); ++k) hat.col(k) *= aging.r(ap, k);
  // P^1/2 Hhat^H (Hhat P Hhat^H + (psi_l + sigma_l) I)^-1 Hhat P^1/2
  return hermitian_part(effective_channel(
      hat, s.p, prediction_error_power(s, aging, ap) + s.sigma(ap)));
}

PrecoderSet structure_aware_precoder(const ChannelPair& pair,
                                     const Scenario& s, const Aging& aging) {
  std::vector<CMatrix> pi(s.num_aps());
  for (int l = 0; l < s.num_aps(); ++l)
    pi[l] = structure_aware_pi(pair.past_block(l), s, aging, l);
  const auto c = solve_team_stages(pi);
  return apply_stages(Scheme::StructureAware, pair.now, s, c);
}

PrecoderFactory::PrecoderFactory(const Scenario& s, const Aging& aging,
                                 int pi_samples, const SeedPath& drop_base,
                                 std::span<const Scheme> schemes)
    : scenario_(s), aging_(aging), pi_samples_(pi_samples), base_(drop_base) {
  for (Scheme scheme : schemes)
    if (scheme == Scheme::LocalTmmse) {
      local_stages_ = local_tmmse_stages(s, pi_samples, drop_base);
      break;
    }
}

PrecoderSet PrecoderFactory::build(Scheme scheme, const ChannelPair& pair,
                                   std::uint64_t realization) const {
  switch (scheme) {
    case Scheme::TeamMmse:
      return team_mmse_precoder(pair, scenario_, aging_, pi_samples_,
                                base_.with_realization(realization));
    case Scheme::LocalTmmse:
      if (!local_stages_)
        throw Error("PrecoderFactory: local_tmmse was not requested");
      return local_tmmse_precoder(pair, scenario_, *local_stages_);
    case Scheme::Centralized:
      return centralized_precoder(pair, scenario_, aging_);
    case Scheme::Naive:
      return naive_precoder(pair, scenario_, aging_);
    case Scheme::StructureAware:
      return structure_aware_precoder(pair, scenario_, aging_);
  }
  throw Error("unknown scheme");
}

}  // namespace cellfree
