#include <cmath>
#include <sstream>

#include "cellfree/oracle.hpp"

namespace cellfree::oracle {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Check solver_equivalence() {
  Rng rng = derive_stream({7, 0, 0, 0, Purpose::Perturbation});
  std::uniform_int_distribution<int> k_dist(1, 8), l_dist(1, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int K = k_dist(rng), L = l_dist(rng);
    std::vector<CMatrix> pi;
    for (int l = 0; l < L; ++l) pi.push_back(random_hermitian_psd(K, 0.95, rng));
    const auto reduced = solve_team_stages(pi);
    const auto stacked = stacked_team_solve(pi);
    for (int l = 0; l < L; ++l)
      worst = std::max(worst, (reduced[l] - stacked[l]).cwiseAbs().maxCoeff());
  }
  return {"reduced solver matches stacked solve", worst <= 1e-10,
          "max |diff| = " + fmt(worst)};
}

Check toy_optimality() {
  const double r = 0.9;
  const auto ens = binary_toy_ensemble(r);
  const Scenario s = toy_scenario(ens, 1.0, 5.0);
  const Aging aging = Aging::uniform(ens.L, ens.K, r);

  const auto team = ensemble_team(ens, s);
  const double j_team = ensemble_objective(ens, team, s);

  bool ok = true;
  std::ostringstream detail;
  detail << "team " << j_team;
  const double j_local = ensemble_objective(ens, ensemble_local(ens, s), s);
  ok = ok && j_team <= j_local;
  detail << ", local " << j_local;
  for (Scheme b : {Scheme::Centralized, Scheme::Naive, Scheme::StructureAware}) {
    const double j = ensemble_objective(ens, ensemble_baseline(ens, s, aging, b), s);
    ok = ok && j_team <= j;
    detail << ", " << to_string(b) << ' ' << j;
  }

  Rng rng = derive_stream({11, 0, 0, 0, Purpose::Perturbation});
  for (int trial = 0; trial < 50; ++trial) {
    const auto delta = random_feasible_perturbation(ens, rng);
    std::vector<PrecoderSet> moved = team;
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i].t += 1e-3 * delta[i];
    ok = ok && ensemble_objective(ens, moved, s) >= j_team;
  }

  double residual = 0.0;
  for (const auto& pi : exact_conditional_pi(ens, s))
    residual = std::max(residual, stage_residual(pi, solve_team_stages(pi)));
  ok = ok && residual <= 1e-10;
  detail << "; residual " << fmt(residual);
  return {"team optimal on finite ensemble", ok, detail.str()};
}

Check zero_correlation_matches_local() {
  const auto ens = binary_toy_ensemble(0.0);
  const Scenario s = toy_scenario(ens, 1.0, 5.0);
  const auto team = ensemble_team(ens, s);
  const auto local = ensemble_local(ens, s);
  double worst = 0.0;
  for (std::size_t i = 0; i < team.size(); ++i)
    worst = std::max(worst, (team[i].t - local[i].t).cwiseAbs().maxCoeff());
  return {"r = 0: team equals local team", worst <= 1e-8,
          "max |diff| = " + fmt(worst)};
}

Check unit_correlation_equivalence() {
  NetworkConfig cfg;
  cfg.L = 4;
  cfg.N = 2;
  cfg.K = 6;
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    Rng geo = derive_stream({3, std::uint64_t(inst), 0, 0, Purpose::Geometry});
    const Scenario s = build_scenario(cfg, geo);
    const Aging aging = Aging::uniform(cfg.L, cfg.K, 1.0);
    Rng ch = derive_stream({3, std::uint64_t(inst), 0, 0, Purpose::Channel});
    const ChannelPair pair = sample_pair(s, aging, ch);
    const SeedPath base{3, std::uint64_t(inst), 0, 0, Purpose::PiSampling};
    const CMatrix team = team_mmse_precoder(pair, s, aging, 4, base).t;
    for (const CMatrix& other : {centralized_precoder(pair, s, aging).t,
                                 naive_precoder(pair, s, aging).t,
                                 structure_aware_precoder(pair, s, aging).t})
      worst = std::max(worst, (team - other).cwiseAbs().maxCoeff());
  }
  return {"r = 1: all delayed-CSI schemes coincide", worst <= 1e-8,
          "max |diff| = " + fmt(worst)};
}

Check push_through() {
  Rng rng = derive_stream({5, 0, 0, 0, Purpose::Perturbation});
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 1 + trial % 4, K = 1 + (trial * 3) % 7;
    CMatrix h(N, K);
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = cd(normal(rng), normal(rng));
    RVector p(K);
    for (int k = 0; k < K; ++k) p(k) = pos(rng);
    const double sigma = pos(rng);
    const CMatrix f = local_mmse_stage(h, p, sigma);
    const CMatrix hp = h * p.cwiseSqrt().asDiagonal();
    CMatrix reg = hp.adjoint() * hp;
    reg.diagonal().array() += sigma;
    const CMatrix alt = hp * reg.inverse();
    worst = std::max(worst, (f - alt).cwiseAbs().maxCoeff());
  }
  return {"local MMSE stage push-through identity", worst <= 1e-10,
          "max |diff| = " + fmt(worst)};
}

Check exact_pi_bounds() {
  const auto ens = binary_toy_ensemble(0.9, 2, 1, 2);
  const Scenario s = toy_scenario(ens, 1.0, 5.0);
  double max_eig = -1.0, min_eig = 1.0, asym = 0.0;
  for (const auto& cls : exact_conditional_pi(ens, s))
    for (const CMatrix& pi : cls) {
      asym = std::max(asym, (pi - pi.adjoint()).norm());
      Eigen::SelfAdjointEigenSolver<CMatrix> es(pi);
      max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
  const bool ok = asym <= 1e-12 && min_eig >= -1e-12 && max_eig < 1.0;
  return {"exact Pi Hermitian PSD with eigenvalues < 1", ok,
          "eig in [" + fmt(min_eig) + ", " + fmt(max_eig) + "]"};
}

Check clarke() {
  const double a = clarke_autocorrelation(10.0, 0.01, 1.0);
  const double b = clarke_autocorrelation(10.0, 0.001, 1.0);
  const bool ok = std::abs(a - 0.90368) <= 1e-4 && std::abs(b - 0.99901) <= 1e-5;
  return {"Clarke mapping for 10 Hz at 10 ms / 1 ms", ok,
          "r = " + std::to_string(a) + ", " + std::to_string(b)};
}

Check single_ap() {
  NetworkConfig cfg;
  cfg.L = 1;
  cfg.N = 3;
  cfg.K = 4;
  Rng geo = derive_stream({9, 0, 0, 0, Purpose::Geometry});
  const Scenario s = build_scenario(cfg, geo);
  const Aging aging = Aging::uniform(1, cfg.K, 0.9);
  Rng ch = derive_stream({9, 0, 0, 0, Purpose::Channel});
  const ChannelPair pair = sample_pair(s, aging, ch);
  const CMatrix team =
      team_mmse_precoder(pair, s, aging, 10, {9, 0, 0, 0, Purpose::PiSampling}).t;
  const CMatrix f = local_mmse_stage(pair.now, s.p, s.sigma(0));
  return {"L = 1: team equals local MMSE stage", team == f, ""};
}

}  // namespace

std::vector<Check> run_verification() {
  std::vector<Check> out;
  for (auto check : {solver_equivalence, toy_optimality,
                     zero_correlation_matches_local,
                     unit_correlation_equivalence, push_through,
                     exact_pi_bounds, clarke, single_ap}) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"(check threw)", false, e.what()});
    }
  }
  return out;
}

}  // namespace cellfree::oracle
