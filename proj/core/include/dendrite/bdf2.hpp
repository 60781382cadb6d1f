#ifndef DENDRITE_BDF2_HPP_
#define DENDRITE_BDF2_HPP_

#include <utility>

#include "dendrite/bdf1.hpp"
#include "dendrite/model.hpp"
#include "dendrite/scheme.hpp"

/// Second-order scheme: BDF2 in time, explicit terms at the extrapolations
/// 2 u^n - u^{n-1}, xi = R^{n+1} / sqrt(E1(2 phi^n - phi^{n-1})). Started by
/// one first-order step.
namespace dendrite::bdf2 {

struct State {
  ScalarField phi_n;
  ScalarField phi_nm1;
  ScalarField temp_n;
  ScalarField temp_nm1;
  ScalarField mu_n;
  ScalarField mu_nm1;
  double r_n = 0.0;
  double r_nm1 = 0.0;
  double t = 0.0;
  long n = 0;
};

/// Extrapolated explicit data.
struct Explicit {
  ScalarField phi_bar;
  ScalarField temp_bar;
  ScalarField mu_bar;
  ScalarField rho;       // rho(phi_bar)
  ScalarField residual;  // g(phi_bar)
  ScalarField hprime;    // h'(phi_bar)
  double e1 = 0.0;       // E1(phi_bar)
};

/// Level -1 copies level 0, so the energy of this state equals the
/// first-order energy of the initial data.
State initial_state(const bdf1::State& s0);

/// Initial state plus one first-order step filling level 1.
struct Bootstrap {
  State state;
  bdf1::State level0;
  bdf1::State level1;
  StepReport report;
};
Bootstrap bootstrap(const ScalarField& phi0, const ScalarField& temp0, double tau, const ModelParams& p,
                    const SourceTerms& sources = {}, const StepOptions& opts = {});

/// Throws ConfigError when E1 of the extrapolated phase is not positive.
Explicit prepare(const State& s, const ModelParams& p);

PhaseSolve solve_phi1_mu1(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const ScalarField* source_phi = nullptr, const StepOptions& opts = {});
PhaseSolve solve_phi2_mu2(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const StepOptions& opts = {});
ScalarField solve_temp1(const State& s, double tau, const ModelParams& p, const ScalarField* source_temp = nullptr);
ScalarField solve_temp2(const State& s, const Explicit& ex, double tau, const ModelParams& p);

StepReport compute_xi(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                      const SplitSolution& parts);

std::pair<State, StepReport> step(const State& s, double tau, const ModelParams& p, const SourceTerms& sources = {},
                                  const StepOptions& opts = {});

/// Two-level modified energy
///   E^n = 1/4 [S1(||grad phi^n||^2 + ||grad(2phi^n - phi^{n-1})||^2) + S2/eps^2(...) + 2 S3/eps^2 ||phi^n - phi^{n-1}||^2
///          + 2 S4 ||grad(phi^n - phi^{n-1})||^2 + lambda/(eps K)(||T^n||^2 + ||2T^n - T^{n-1}||^2)
///          + 2(R_n^2 + (2R_n - R_{n-1})^2)].
double modified_energy(const State& s, const ModelParams& p);

EnergyBalance energy_balance(const State& before, const State& after, double tau, const ModelParams& p);
ProofLines proof_lines(const State& before, const State& after, double tau, const ModelParams& p);

/// |energy balance| / |E^n| for one step.
double identity_check(const State& before, const State& after, double tau, const ModelParams& p);

}  // namespace dendrite::bdf2

#endif  // DENDRITE_BDF2_HPP_
