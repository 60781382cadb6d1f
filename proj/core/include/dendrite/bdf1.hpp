#ifndef DENDRITE_BDF1_HPP_
#define DENDRITE_BDF1_HPP_

#include <utility>

#include "dendrite/model.hpp"
#include "dendrite/scheme.hpp"

/// First-order decoupled scheme. One step costs two phase solves, two
/// temperature solves and a scalar closure for xi = R^{n+1} / sqrt(E1(phi^n)).
namespace dendrite::bdf1 {

struct State {
  ScalarField phi;
  ScalarField temp;
  ScalarField mu;
  double r = 0.0;
  double t = 0.0;
  long n = 0;
};

/// Quantities evaluated explicitly at level n.
struct Explicit {
  ScalarField rho;       // rho(phi^n)
  ScalarField residual;  // g(phi^n)
  ScalarField hprime;    // h'(phi^n)
  double e1 = 0.0;       // E1(phi^n)
};

/// mu = -g(phi) + S1 Lap phi - S2/eps^2 phi - lambda/eps h'(phi) T, i.e. the
/// reformulated chemical potential with R / sqrt(E1) = 1.
ScalarField chemical_potential(const ScalarField& phi, const ScalarField& temp, const ModelParams& p);

/// R^0 = sqrt(E1(phi0)); mu^0 from chemical_potential(). Throws ConfigError
/// when E1(phi0) <= 0.
State init_state(const ScalarField& phi0, const ScalarField& temp0, const ModelParams& p);

Explicit prepare(const State& s, const ModelParams& p);

/// (phi1 - phi^n)/tau = M(mu1 - S3/eps^2 (phi1 - phi^n) + S4 Lap(phi1 - phi^n)),
/// mu1 = S1 Lap phi1 - S2/eps^2 phi1. source_phi (may be null) is added to
/// the right-hand side of the phase equation.
PhaseSolve solve_phi1_mu1(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const ScalarField* source_phi = nullptr, const StepOptions& opts = {});

/// phi2/tau = M(mu2 - S3/eps^2 phi2 + S4 Lap phi2),
/// mu2 = -g(phi^n) + S1 Lap phi2 - S2/eps^2 phi2 - lambda/eps h'(phi^n) T^n.
PhaseSolve solve_phi2_mu2(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const StepOptions& opts = {});

/// (T1 - T^n)/tau = D Lap T1 (+ source)
ScalarField solve_temp1(const State& s, double tau, const ModelParams& p,
                        const ScalarField* source_temp = nullptr);
/// T2/tau = D Lap T2 + K h'(phi^n) M(phi^n) mu^n
ScalarField solve_temp2(const State& s, const Explicit& ex, double tau, const ModelParams& p);

/// xi = A2 / A1 with A1, A2 in their simplified, manifestly positive form.
/// Throws SolverError if A1 <= 0.
StepReport compute_xi(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                      const SplitSolution& parts);

/// One full step. Sources are evaluated at t + tau.
std::pair<State, StepReport> step(const State& s, double tau, const ModelParams& p,
                                  const SourceTerms& sources = {}, const StepOptions& opts = {});

/// E^n = S1/2 ||grad phi||^2 + S2/(2 eps^2)||phi||^2 + lambda/(2 eps K)||T||^2 + R^2
double modified_energy(const State& s, const ModelParams& p);

/// Energy law between two consecutive states, assembled from the states only.
EnergyBalance energy_balance(const State& before, const State& after, double tau, const ModelParams& p);

/// Residuals of the three inner-product identities behind the energy law.
ProofLines proof_lines(const State& before, const State& after, double tau, const ModelParams& p);

}  // namespace dendrite::bdf1

#endif  // DENDRITE_BDF1_HPP_
