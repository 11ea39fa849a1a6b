#include <doctest.h>

#include <cmath>
#include <map>

#include "cellfree/oracle.hpp"
#include "cellfree/precoding.hpp"

using namespace cellfree;

namespace {

double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cd(normal(rng), normal(rng));
  return m;
}

Scenario desk_scenario(std::uint64_t inst) {
  NetworkConfig cfg;
  cfg.L = 4;
  cfg.N = 2;
  cfg.K = 6;
  Rng geo = derive_stream({21, inst, 0, 0, Purpose::Geometry});
  return build_scenario(cfg, geo);
}

// E[f(h)] and E[f(h)^2] for h ~ CN(mu, v) by a trapezoid rule on a 1201^2
// grid over +-9 standard deviations of each real component.
std::pair<double, double> gaussian_moments(cd mu, double v,
                                           double (*f)(cd, double, double),
                                           double p, double sigma) {
  const int n = 1201;
  const double half = 9.0, step = 2 * half / (n - 1);
  const double sd = std::sqrt(v / 2);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const double x = -half + i * step;
    w[i] = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI) * step;
  }
  double m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cd h = mu + cd(sd * (-half + i * step), sd * (-half + j * step));
      const double val = f(h, p, sigma);
      m1 += w[i] * w[j] * val;
      m2 += w[i] * w[j] * val * val;
    }
  return {m1, m2};
}

double scalar_effective(cd h, double p, double sigma) {
  return p * std::norm(h) / (p * std::norm(h) + sigma);
}

}  // namespace

TEST_CASE("local MMSE stage") {
  SUBCASE("scalar formula") {
    CMatrix h(1, 1);
    h(0, 0) = cd(0.8, -1.7);
    RVector p(1);
    p << 2.5;
    const CMatrix f = local_mmse_stage(h, p, 0.6);
    const cd expected = std::sqrt(2.5) * h(0, 0) / (2.5 * std::norm(h(0, 0)) + 0.6);
    CHECK(std::abs(f(0, 0) - expected) <= 1e-14);
  }

  SUBCASE("zero channel gives zero stage") {
    const CMatrix f = local_mmse_stage(CMatrix::Zero(3, 4), RVector::Ones(4), 1.0);
    CHECK(f.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("noise-dominated limit") {
    Rng rng = derive_stream({1, 0, 0, 0, Purpose::Perturbation});
    const CMatrix h = random_matrix(3, 4, rng);
    RVector p(4);
    p << 0.5, 1.0, 2.0, 1.5;
    const double sigma = 1e8;
    const CMatrix f = local_mmse_stage(h, p, sigma);
    const CMatrix limit = h * p.cwiseSqrt().asDiagonal() / sigma;
    for (Eigen::Index i = 0; i < f.size(); ++i)
      CHECK(std::abs(f(i) / limit(i) - 1.0) <= 1e-6);
  }

  SUBCASE("push-through and effective channel spectrum") {
    Rng rng = derive_stream({2, 0, 0, 0, Purpose::Perturbation});
    for (auto [N, K] : {std::pair{1, 1}, {2, 5}, {4, 3}, {4, 8}}) {
      const CMatrix h = random_matrix(N, K, rng);
      RVector p = RVector::LinSpaced(K, 0.3, 2.0);
      const CMatrix f = local_mmse_stage(h, p, 0.7);
      const CMatrix hp = h * p.cwiseSqrt().asDiagonal();
      CMatrix reg = hp.adjoint() * hp;
      reg.diagonal().array() += 0.7;
      CHECK(max_abs(f - hp * reg.fullPivLu().inverse()) <= 1e-12);

      const CMatrix e = effective_channel(h, p, 0.7);
      CHECK(max_abs(e - e.adjoint()) <= 1e-12);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (e + e.adjoint()));
      CHECK(es.eigenvalues().minCoeff() >= -1e-12);
      CHECK(es.eigenvalues().maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("solve_team_stages") {
  SUBCASE("single AP gives the identity exactly") {
    Rng rng = derive_stream({3, 0, 0, 0, Purpose::Perturbation});
    const CMatrix pi = oracle::random_hermitian_psd(4, 0.9, rng);
    const auto c = solve_team_stages(std::vector<CMatrix>{pi});
    REQUIRE(c.size() == 1);
    CHECK(c[0] == CMatrix::Identity(4, 4));
  }

  SUBCASE("zero coefficients give identities") {
    const auto c = solve_team_stages(std::vector<CMatrix>(3, CMatrix::Zero(2, 2)));
    for (const CMatrix& m : c) CHECK(max_abs(m - CMatrix::Identity(2, 2)) <= 1e-15);
  }

  SUBCASE("two scalar APs in closed form") {
    const double a = 0.3, b = 0.6;
    const auto c = solve_team_stages(
        std::vector<CMatrix>{CMatrix::Constant(1, 1, a), CMatrix::Constant(1, 1, b)});
    CHECK(std::abs(c[0](0, 0) - (1 - b) / (1 - a * b)) <= 1e-14);
    CHECK(std::abs(c[1](0, 0) - (1 - a) / (1 - a * b)) <= 1e-14);
  }

  SUBCASE("matches the stacked system") {
    Rng rng = derive_stream({4, 0, 0, 0, Purpose::Perturbation});
    for (int trial = 0; trial < 30; ++trial) {
      const int L = 2 + trial % 5, K = 1 + trial % 7;
      std::vector<CMatrix> pi;
      for (int l = 0; l < L; ++l) pi.push_back(oracle::random_hermitian_psd(K, 0.95, rng));
      const auto reduced = solve_team_stages(pi);
      const auto stacked = oracle::stacked_team_solve(pi);
      for (int l = 0; l < L; ++l) CHECK(max_abs(reduced[l] - stacked[l]) <= 1e-10);
      CHECK(oracle::stage_residual(pi, reduced) <= 1e-10);
    }
  }

  SUBCASE("singular stage is reported") {
    std::vector<CMatrix> pi = {CMatrix::Identity(2, 2), CMatrix::Zero(2, 2)};
    CHECK_THROWS_AS(solve_team_stages(pi), SingularStage);
  }
}

TEST_CASE("estimate_pi") {
  RMatrix gains(1, 1);
  gains << 2.0;
  const Scenario s = scenario_from_gains(1, gains, 1.5);
  CMatrix z(1, 1);
  z(0, 0) = cd(1.1, -0.3);

  SUBCASE("r = 1 is exact") {
    Rng rng = derive_stream({5, 0, 0, 0, Purpose::PiSampling});
    const CMatrix pi = estimate_pi(z, s, Aging::uniform(1, 1, 1.0), 0, 7, rng);
    CHECK(max_abs(pi - effective_channel(z, s.p, 1.0)) <= 1e-15);
  }

  SUBCASE("Monte Carlo matches quadrature of the conditional law") {
    const int M = 100000;
    for (double r : {0.0, 0.7, 0.95}) {
      CAPTURE(r);
      const auto [m1, m2] = gaussian_moments(r * z(0, 0), (1 - r * r) * 2.0,
                                             scalar_effective, 1.5, 1.0);
      const double se = std::sqrt((m2 - m1 * m1) / M);
      Rng rng = derive_stream({6, 0, 0, 0, Purpose::PiSampling});
      const CMatrix pi = estimate_pi(z, s, Aging::uniform(1, 1, r), 0, M, rng);
      CHECK(std::abs(pi(0, 0).imag()) == 0.0);
      CHECK(std::abs(pi(0, 0).real() - m1) <= 3 * se);
    }
  }

  SUBCASE("r = 0 ignores the delayed block") {
    CMatrix other(1, 1);
    other(0, 0) = cd(-4.0, 2.0);
    const Aging aging = Aging::uniform(1, 1, 0.0);
    Rng a = derive_stream({7, 0, 0, 0, Purpose::PiSampling});
    Rng b = derive_stream({7, 0, 0, 0, Purpose::PiSampling});
    CHECK(estimate_pi(z, s, aging, 0, 50, a) == estimate_pi(other, s, aging, 0, 50, b));
  }
}

TEST_CASE("enumerated conditional coefficients match sampling the ensemble") {
  const auto ens = oracle::binary_toy_ensemble(0.8, 2, 1, 2);
  const Scenario s = oracle::toy_scenario(ens, 1.0, 3.0);
  const auto exact = oracle::exact_conditional_pi(ens, s);
  Rng rng = derive_stream({8, 0, 0, 0, Purpose::PiSampling});
  const int M = 100000;
  for (std::size_t c = 0; c < ens.classes.size(); c += 5) {
    const auto& cls = ens.classes[c];
    std::uniform_int_distribution<std::size_t> pick(0, cls.size() - 1);
    for (int l = 0; l < ens.L; ++l) {
      CMatrix sum = CMatrix::Zero(ens.K, ens.K), sum2 = CMatrix::Zero(ens.K, ens.K);
      for (int m = 0; m < M; ++m) {
        const CMatrix e =
            effective_channel(ens.outcomes[cls[pick(rng)]].pair.now_block(l), s.p, 1.0);
        sum += e;
        sum2 += e.cwiseAbs2().cast<cd>();
      }
      const CMatrix mean = sum / double(M);
      for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double var = sum2(i).real() / M - std::norm(mean(i));
        const double se = std::sqrt(std::max(var, 0.0) / M);
        CHECK(std::abs(mean(i) - exact[c][l](i)) <= 3 * se + 1e-15);
      }
    }
  }
}

TEST_CASE("team MMSE precoder") {
  SUBCASE("r = 1 coincides with the other delayed-CSI schemes") {
    for (std::uint64_t inst = 0; inst < 3; ++inst) {
      const Scenario s = desk_scenario(inst);
      const Aging aging = Aging::uniform(4, 6, 1.0);
      Rng ch = derive_stream({21, inst, 0, 0, Purpose::Channel});
      const ChannelPair pair = sample_pair(s, aging, ch);
      const CMatrix team =
          team_mmse_precoder(pair, s, aging, 3, {21, inst, 0, 0, Purpose::PiSampling}).t;
      CHECK(max_abs(team - centralized_precoder(pair, s, aging).t) <= 1e-8);
      CHECK(max_abs(team - naive_precoder(pair, s, aging).t) <= 1e-8);
      CHECK(max_abs(team - structure_aware_precoder(pair, s, aging).t) <= 1e-8);
    }
  }

  SUBCASE("single AP reduces to the local stage") {
    NetworkConfig cfg;
    cfg.L = 1;
    cfg.N = 3;
    cfg.K = 5;
    Rng geo = derive_stream({22, 0, 0, 0, Purpose::Geometry});
    const Scenario s = build_scenario(cfg, geo);
    const Aging aging = Aging::uniform(1, 5, 0.6);
    Rng ch = derive_stream({22, 0, 0, 0, Purpose::Channel});
    const ChannelPair pair = sample_pair(s, aging, ch);
    const CMatrix f = local_mmse_stage(pair.now, s.p, s.sigma(0));
    const SeedPath base{22, 0, 0, 0, Purpose::PiSampling};
    CHECK(team_mmse_precoder(pair, s, aging, 5, base).t == f);
    CHECK(local_tmmse_precoder(pair, s, 5, base).t == f);
    CHECK(structure_aware_precoder(pair, s, aging).t == f);
    CHECK(max_abs(naive_precoder(pair, s, aging).t - f) <= 1e-12);
  }

  SUBCASE("each AP's block depends only on its own timely channel") {
    const Scenario s = desk_scenario(4);
    const Aging aging = Aging::uniform(4, 6, 0.9);
    Rng ch = derive_stream({23, 0, 0, 0, Purpose::Channel});
    const ChannelPair pair = sample_pair(s, aging, ch);
    Rng noise = derive_stream({23, 0, 0, 0, Purpose::Perturbation});
    const SeedPath base{23, 0, 0, 0, Purpose::PiSampling};
    const TeamStages local = local_tmmse_stages(s, 20, base);
    for (int l = 0; l < 4; ++l) {
      ChannelPair moved = pair;
      for (int j = 0; j < 4; ++j)
        if (j != l) moved.now.middleRows(j * s.N, s.N) = random_matrix(s.N, 6, noise);
      auto same_block = [&](const PrecoderSet& a, const PrecoderSet& b) {
        return CMatrix(a.block(l)) == CMatrix(b.block(l));
      };
      CHECK(same_block(team_mmse_precoder(pair, s, aging, 20, base),
                       team_mmse_precoder(moved, s, aging, 20, base)));
      CHECK(same_block(local_tmmse_precoder(pair, s, local),
                       local_tmmse_precoder(moved, s, local)));
      CHECK(same_block(naive_precoder(pair, s, aging), naive_precoder(moved, s, aging)));
      CHECK(same_block(structure_aware_precoder(pair, s, aging),
                       structure_aware_precoder(moved, s, aging)));
      CHECK(same_block(centralized_precoder(pair, s, aging),
                       centralized_precoder(moved, s, aging)));
    }
  }
}

TEST_CASE("centralized precoder") {
  RMatrix gains(1, 1);
  gains << 1.7;
  const Scenario s = scenario_from_gains(1, gains, 2.0);
  ChannelPair pair{1, CMatrix(1, 1), CMatrix(1, 1)};
  pair.past(0, 0) = cd(0.4, 1.2);
  pair.now(0, 0) = cd(-3.0, 0.1);

  const double r = 0.75, p = 2.0, g = 1.7;
  const cd hbar = pair.past(0, 0);
  const cd expected =
      std::sqrt(p) * r * hbar / (p * r * r * std::norm(hbar) + p * (1 - r * r) * g + 1.0);
  CHECK(std::abs(centralized_precoder(pair, s, Aging::uniform(1, 1, r)).t(0, 0) -
                 expected) <= 1e-14);
  CHECK(centralized_precoder(pair, s, Aging::uniform(1, 1, 0.0)).t.cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("naive precoder") {
  SUBCASE("two scalar APs against a direct 2x2 evaluation") {
    RMatrix gains(2, 1);
    gains << 1.3, 0.4;
    const Scenario s = scenario_from_gains(1, gains, 1.8);
    const double r = 0.85, p = 1.8;
    ChannelPair pair{1, CMatrix(2, 1), CMatrix(2, 1)};
    pair.past << cd(0.9, -0.2), cd(-0.5, 0.7);
    pair.now << cd(1.1, 0.3), cd(-0.2, 0.4);
    const CMatrix t = naive_precoder(pair, s, Aging::uniform(2, 1, r)).t;

    const double psi[2] = {p * (1 - r * r) * 1.3, p * (1 - r * r) * 0.4};
    for (int l = 0; l < 2; ++l) {
      const int o = 1 - l;
      const cd a = pair.now(l, 0), b = r * pair.past(o, 0);
      // [a; b] column, D = diag(sigma, psi_o + sigma); row l of
      // (p v v^H + D)^-1 v sqrt(p) by the Sherman-Morrison formula.
      const double d_own = 1.0, d_other = psi[o] + 1.0;
      const double denom = 1.0 + p * (std::norm(a) / d_own + std::norm(b) / d_other);
      const cd expected = std::sqrt(p) * (a / d_own) / denom;
      CHECK(std::abs(t(l, 0) - expected) <= 1e-12);
    }
  }

  SUBCASE("r = 1 equals centralized") {
    const Scenario s = desk_scenario(5);
    const Aging aging = Aging::uniform(4, 6, 1.0);
    Rng ch = derive_stream({24, 0, 0, 0, Purpose::Channel});
    const ChannelPair pair = sample_pair(s, aging, ch);
    CHECK(max_abs(naive_precoder(pair, s, aging).t - centralized_precoder(pair, s, aging).t) <=
          1e-10);
  }
}

TEST_CASE("structure-aware precoder") {
  const Scenario s = desk_scenario(6);
  Rng ch = derive_stream({25, 0, 0, 0, Purpose::Channel});

  SUBCASE("r = 0 reduces to local stages") {
    const Aging aging = Aging::uniform(4, 6, 0.0);
    const ChannelPair pair = sample_pair(s, aging, ch);
    const CMatrix t = structure_aware_precoder(pair, s, aging).t;
    for (int l = 0; l < 4; ++l)
      CHECK(max_abs(t.middleRows(l * s.N, s.N) -
                    local_mmse_stage(pair.now_block(l), s.p, s.sigma(l))) <= 1e-15);
  }

  SUBCASE("coefficients are Hermitian PSD below one") {
    const Aging aging = Aging::uniform(4, 6, 0.9);
    const ChannelPair pair = sample_pair(s, aging, ch);
    for (int l = 0; l < 4; ++l) {
      const CMatrix pi = structure_aware_pi(pair.past_block(l), s, aging, l);
      CHECK(max_abs(pi - pi.adjoint()) == 0.0);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(pi);
      CHECK(es.eigenvalues().minCoeff() >= -1e-12);
      CHECK(es.eigenvalues().maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("optimality on finite ensembles") {
  auto objectives = [](const FiniteEnsemble& ens, double r) {
    const Scenario s = oracle::toy_scenario(ens, 1.0, 5.0);
    const Aging aging = Aging::uniform(ens.L, ens.K, r);
    std::map<Scheme, double> j;
    j[Scheme::TeamMmse] = oracle::ensemble_objective(ens, oracle::ensemble_team(ens, s), s);
    j[Scheme::LocalTmmse] = oracle::ensemble_objective(ens, oracle::ensemble_local(ens, s), s);
    for (Scheme b : {Scheme::Centralized, Scheme::Naive, Scheme::StructureAware})
      j[b] = oracle::ensemble_objective(ens, oracle::ensemble_baseline(ens, s, aging, b), s);
    return j;
  };

  SUBCASE("16-outcome ensemble") {
    const auto ens = oracle::binary_toy_ensemble(0.9);
    const auto j = objectives(ens, 0.9);
    for (Scheme b : {Scheme::Centralized, Scheme::Naive, Scheme::StructureAware})
      CHECK(j.at(Scheme::TeamMmse) < j.at(b));
    // |h_now| has the same law in every class here, so the conditional and
    // unconditional coefficients agree.
    CHECK(j.at(Scheme::TeamMmse) == doctest::Approx(j.at(Scheme::LocalTmmse)).epsilon(1e-12));

    // Stages from the stacked reference solve give the same objective.
    const Scenario s = oracle::toy_scenario(ens, 1.0, 5.0);
    const auto pi = oracle::exact_conditional_pi(ens, s);
    std::vector<PrecoderSet> ref;
    for (const auto& o : ens.outcomes)
      ref.push_back(apply_stages(Scheme::TeamMmse, o.pair.now, s,
                                 oracle::stacked_team_solve(pi[o.past_class])));
    CHECK(std::abs(oracle::ensemble_objective(ens, ref, s) - j.at(Scheme::TeamMmse)) <= 1e-10);
  }

  SUBCASE("two-user ensemble: team strictly best and stationary") {
    const auto ens = oracle::binary_toy_ensemble(0.8, 2, 1, 2);
    const auto j = objectives(ens, 0.8);
    for (Scheme b : {Scheme::LocalTmmse, Scheme::Centralized, Scheme::Naive,
                     Scheme::StructureAware})
      CHECK(j.at(Scheme::TeamMmse) < j.at(b));

    const Scenario s = oracle::toy_scenario(ens, 1.0, 5.0);
    const auto team = oracle::ensemble_team(ens, s);
    Rng rng = derive_stream({26, 0, 0, 0, Purpose::Perturbation});
    for (int trial = 0; trial < 20; ++trial) {
      const auto delta = oracle::random_feasible_perturbation(ens, rng);
      std::vector<PrecoderSet> moved = team;
      for (std::size_t i = 0; i < moved.size(); ++i) moved[i].t += 1e-3 * delta[i];
      CHECK(oracle::ensemble_objective(ens, moved, s) >= j.at(Scheme::TeamMmse));
    }
  }

  SUBCASE("r = 0: exact team equals exact local") {
    const auto ens = oracle::binary_toy_ensemble(0.0, 2, 1, 2);
    const Scenario s = oracle::toy_scenario(ens, 1.0, 5.0);
    const auto team = oracle::ensemble_team(ens, s);
    const auto local = oracle::ensemble_local(ens, s);
    for (std::size_t i = 0; i < team.size(); ++i)
      CHECK(max_abs(team[i].t - local[i].t) <= 1e-12);
  }
}

TEST_CASE("PrecoderFactory") {
  const Scenario s = desk_scenario(7);
  const Aging aging = Aging::uniform(4, 6, 0.9);
  Rng ch = derive_stream({27, 0, 0, 0, Purpose::Channel});
  const ChannelPair pair = sample_pair(s, aging, ch);
  const SeedPath base{27, 3, 0, 0, Purpose::Geometry};

  const std::array<Scheme, 1> team_only = {Scheme::TeamMmse};
  const PrecoderFactory narrow(s, aging, 15, base, team_only);
  CHECK_THROWS_AS(narrow.build(Scheme::LocalTmmse, pair, 0), Error);
  CHECK(narrow.build(Scheme::TeamMmse, pair, 4).t ==
        team_mmse_precoder(pair, s, aging, 15, base.with_realization(4)).t);

  const PrecoderFactory all(s, aging, 15, base, kAllSchemes);
  CHECK(all.build(Scheme::LocalTmmse, pair, 9).t == local_tmmse_precoder(pair, s, 15, base).t);
  for (Scheme scheme : kAllSchemes) {
    CHECK(all.build(scheme, pair, 1).scheme == scheme);
    CHECK(scheme_from_string(to_string(scheme)) == scheme);
  }
  CHECK_FALSE(scheme_from_string("mmse").has_value());
}
