#pragma once

#include <span>
#include <string>
#include <vector>

#include "cellfree/channel.hpp"
#include "cellfree/precoding.hpp"
#include "cellfree/scenario.hpp"

// Reference computations used to check the production paths: exact
// expectations by enumeration over a FiniteEnsemble and the full stacked
// linear system for the team stages. None of this is used by the simulator.
namespace cellfree::oracle {

/// Exact E[P^1/2 H_l^H F_l | H[t-d]] for every conditional class:
/// result[class][l].
std::vector<std::vector<CMatrix>> exact_conditional_pi(
    const FiniteEnsemble& ens, const Scenario& s);

/// Exact unconditional E[P^1/2 H_l^H F_l] per AP.
std::vector<CMatrix> exact_unconditional_pi(const FiniteEnsemble& ens,
                                            const Scenario& s);

/// Solves the LK x LK block system with blocks A(l, j) = I if l == j else
/// Pi_j, right-hand side stacked identities, by full-pivot LU.
std::vector<CMatrix> stacked_team_solve(std::span<const CMatrix> pi);

/// max_l ||C_l + sum_{j != l} Pi_j C_j - I||_F.
double stage_residual(std::span<const CMatrix> pi, std::span<const CMatrix> c);

/// Team precoder per outcome from exact conditional coefficients.
std::vector<PrecoderSet> ensemble_team(const FiniteEnsemble& ens,
                                       const Scenario& s);

/// Local team precoder per outcome from exact unconditional coefficients.
std::vector<PrecoderSet> ensemble_local(const FiniteEnsemble& ens,
                                        const Scenario& s);

/// Centralized, naive or structure-aware precoder per outcome.
std::vector<PrecoderSet> ensemble_baseline(const FiniteEnsemble& ens,
                                           const Scenario& s,
                                           const Aging& aging, Scheme scheme);

/// Probability-weighted team MSE objective over the ensemble.
double ensemble_objective(const FiniteEnsemble& ens,
                          std::span<const PrecoderSet> precoders,
                          const Scenario& s);

/// Random perturbation Delta per outcome whose block l depends only on
/// (H_l[t], H[t-d]), i.e. respects every AP's information constraint.
std::vector<CMatrix> random_feasible_perturbation(const FiniteEnsemble& ens,
                                                  Rng& rng);

/// Scenario matching an ensemble: every gain equal to `gain`, equal powers
/// summing to `sum_power`, sigma = 1.
Scenario toy_scenario(const FiniteEnsemble& ens, double gain,
                      double sum_power);

/// U diag(lambda) U^H with Haar-like U and lambda uniform in [0, max_eig].
CMatrix random_hermitian_psd(int K, double max_eig, Rng& rng);

/// The 16-outcome ensemble: L = 2, N = K = 1, alphabet {+1, -1}, errors
/// {+e, -e} with e = sqrt(1 - r^2) so both marginals have unit variance.
FiniteEnsemble binary_toy_ensemble(double r, int L = 2, int N = 1, int K = 1);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Finite-oracle and invariant checks run by the `verify` CLI subcommand.
std::vector<Check> run_verification();

}  // namespace cellfree::oracle
