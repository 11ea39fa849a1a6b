#include "cellfree/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>

namespace cellfree::oracle {

namespace {

// P^1/2 H^H H P^1/2 (P^1/2 H^H H P^1/2 + sigma I_K)^-1, the K-dimensional
// form of P^1/2 H^H F (push-through), evaluated independently of
// effective_channel().
CMatrix effective_channel_kspace(const CMatrix& h, const RVector& p,
                                 double sigma) {
  const CMatrix hp = h * p.cwiseSqrt().asDiagonal();
  const CMatrix gram = hp.adjoint() * hp;
  CMatrix reg = gram;
  reg.diagonal().array() += sigma;
  // gram and reg commute.
  return reg.fullPivLu().solve(gram);
}

std::vector<double> block_key(const Eigen::Ref<const CMatrix>& b) {
  std::vector<double> key;
  key.reserve(2 * b.size());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      key.push_back(b(i, j).real());
      key.push_back(b(i, j).imag());
    }
  return key;
}

}  // namespace

std::vector<std::vector<CMatrix>> exact_conditional_pi(
    const FiniteEnsemble& ens, const Scenario& s) {
  std::vector<std::vector<CMatrix>> out(ens.classes.size());
  for (std::size_t c = 0; c < ens.classes.size(); ++c) {
    double mass = 0.0;
    std::vector<CMatrix> acc(ens.L, CMatrix::Zero(ens.K, ens.K));
    for (int idx : ens.classes[c]) {
      const auto& o = ens.outcomes[idx];
      mass += o.probability;
      for (int l = 0; l < ens.L; ++l)
        acc[l] += o.probability *
                  effective_channel_kspace(o.pair.now_block(l), s.p, s.sigma(l));
    }
    for (auto& m : acc) m /= mass;
    out[c] = std::move(acc);
  }
  return out;
}

std::vector<CMatrix> exact_unconditional_pi(const FiniteEnsemble& ens,
                                            const Scenario& s) {
  std::vector<CMatrix> acc(ens.L, CMatrix::Zero(ens.K, ens.K));
  for (const auto& o : ens.outcomes)
    for (int l = 0; l < ens.L; ++l)
      acc[l] += o.probability *
                effective_channel_kspace(o.pair.now_block(l), s.p, s.sigma(l));
  return acc;
}

std::vector<CMatrix> stacked_team_solve(std::span<const CMatrix> pi) {
  const auto L = static_cast<Eigen::Index>(pi.size());
  const auto K = pi.front().rows();
  CMatrix a(L * K, L * K);
  CMatrix rhs(L * K, K);
  for (Eigen::Index l = 0; l < L; ++l) {
    rhs.middleRows(l * K, K).setIdentity();
    for (Eigen::Index j = 0; j < L; ++j)
      a.block(l * K, j * K, K, K) =
          (l == j) ? CMatrix::Identity(K, K) : pi[j];
  }
  const CMatrix x = a.fullPivLu().solve(rhs);
  std::vector<CMatrix> c;
  for (Eigen::Index l = 0; l < L; ++l) c.push_back(x.middleRows(l * K, K));
  return c;
}

double stage_residual(std::span<const CMatrix> pi, std::span<const CMatrix> c) {
  double worst = 0.0;
  const auto K = pi.front().rows();
  for (std::size_t l = 0; l < pi.size(); ++l) {
    CMatrix r = c[l] - CMatrix::Identity(K, K);
    for (std::size_t j = 0; j < pi.size(); ++j)
      if (j != l) r += pi[j] * c[j];
    worst = std::max(worst, r.norm());
  }
  return worst;
}

std::vector<PrecoderSet> ensemble_team(const FiniteEnsemble& ens,
                                       const Scenario& s) {
  const auto pi = exact_conditional_pi(ens, s);
  std::vector<std::vector<CMatrix>> stages(pi.size());
  for (std::size_t c = 0; c < pi.size(); ++c)
    stages[c] = solve_team_stages(pi[c]);
  std::vector<PrecoderSet> out;
  out.reserve(ens.outcomes.size());
  for (const auto& o : ens.outcomes)
    out.push_back(apply_stages(Scheme::TeamMmse, o.pair.now, s,
                               stages[o.past_class]));
  return out;
}

std::vector<PrecoderSet> ensemble_local(const FiniteEnsemble& ens,
                                        const Scenario& s) {
  const auto stages = solve_team_stages(exact_unconditional_pi(ens, s));
  std::vector<PrecoderSet> out;
  out.reserve(ens.outcomes.size());
  for (const auto& o : ens.outcomes)
    out.push_back(apply_stages(Scheme::LocalTmmse, o.pair.now, s, stages));
  return out;
}

std::vector<PrecoderSet> ensemble_baseline(const FiniteEnsemble& ens,
                                           const Scenario& s,
                                           const Aging& aging, Scheme scheme) {
  std::vector<PrecoderSet> out;
  out.reserve(ens.outcomes.size());
  for (const auto& o : ens.outcomes) {
    switch (scheme) {
      case Scheme::Centralized:
        out.push_back(centralized_precoder(o.pair, s, aging));
        break;
      case Scheme::Naive:
        out.push_back(naive_precoder(o.pair, s, aging));
        break;
      case Scheme::StructureAware:
        out.push_back(structure_aware_precoder(o.pair, s, aging));
        break;
      default:
        throw Error("ensemble_baseline: not a closed-form scheme");
    }
  }
  return out;
}

double ensemble_objective(const FiniteEnsemble& ens,
                          std::span<const PrecoderSet> precoders,
                          const Scenario& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < ens.outcomes.size(); ++i) {
    const auto& o = ens.outcomes[i];
    const CMatrix& h = o.pair.now;
    const CMatrix& t = precoders[i].t;
    double value = 0.0;
    for (int j = 0; j < ens.K; ++j)
      for (int k = 0; k < ens.K; ++k) {
        const cd g = std::sqrt(s.p(j)) * h.col(j).dot(t.col(k));
        value += std::norm(g - (j == k ? 1.0 : 0.0));
      }
    for (int l = 0; l < ens.L; ++l)
      value += s.sigma(l) * t.middleRows(l * ens.N, ens.N).squaredNorm();
    total += o.probability * value;
  }
  return total;
}

std::vector<CMatrix> random_feasible_perturbation(const FiniteEnsemble& ens,
                                                  Rng& rng) {
  std::normal_distribution<double> normal;
  std::map<std::tuple<int, int, std::vector<double>>, CMatrix> table;
  std::vector<CMatrix> out;
  out.reserve(ens.outcomes.size());
  for (const auto& o : ens.outcomes) {
    CMatrix delta(ens.L * ens.N, ens.K);
    for (int l = 0; l < ens.L; ++l) {
      auto key = std::make_tuple(o.past_class, l, block_key(o.pair.now_block(l)));
      auto it = table.find(key);
      if (it == table.end()) {
        CMatrix d(ens.N, ens.K);
        for (Eigen::Index i = 0; i < d.size(); ++i)
          d(i) = cd(normal(rng), normal(rng));
        it = table.emplace(std::move(key), std::move(d)).first;
      }
      delta.middleRows(l * ens.N, ens.N) = it->second;
    }
    out.push_back(std::move(delta));
  }
  return out;
}

Scenario toy_scenario(const FiniteEnsemble& ens, double gain,
                      double sum_power) {
  return scenario_from_gains(ens.N, RMatrix::Constant(ens.L, ens.K, gain),
                             sum_power, 0.0);
}

CMatrix random_hermitian_psd(int K, double max_eig, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, max_eig);
  CMatrix g(K, K);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = cd(normal(rng), normal(rng));
  const CMatrix q = Eigen::HouseholderQR<CMatrix>(g).householderQ();
  RVector lambda(K);
  for (int i = 0; i < K; ++i) lambda(i) = uniform(rng);
  const CMatrix pi = q * lambda.cast<cd>().asDiagonal() * q.adjoint();
  return 0.5 * (pi + pi.adjoint());
}

FiniteEnsemble binary_toy_ensemble(double r, int L, int N, int K) {
  const std::array<cd, 2> alphabet = {cd(1.0), cd(-1.0)};
  const double e = std::sqrt(std::max(0.0, 1.0 - r * r));
  const std::array<cd, 2> errors = {cd(e), cd(-e)};
  return finite_toy_ensemble(L, N, K, alphabet, r, errors);
}

}  // namespace cellfree::oracle
