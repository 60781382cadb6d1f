#ifndef DENDRITE_SCHEME_HPP_
#define DENDRITE_SCHEME_HPP_

#include <cmath>
#include <limits>

#include "dendrite/grid.hpp"

namespace dendrite {

struct StepOptions {
  /// Assemble the discrete energy balance after every step.
  bool check_identity = true;
  /// Run the four linear solves of a step concurrently.
  bool parallel = false;
  double cg_tol = 1e-10;
  int cg_maxit = 500;
};

/// Per-step diagnostics of the xi closure.
struct StepReport {
  double xi = 1.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double r_new = 0.0;
  /// E1 at the level the closure is taken (phi^n or the extrapolation).
  double e1 = 0.0;
  int cg_iterations = 0;
  /// |energy balance| / |E^n|; NaN when not assembled (check disabled or
  /// source terms present).
  double identity_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Both sides of the discrete energy law
///   E^{n+1} - E^n = -Q^{n+1} - tau (||sqrt(rho) D_t phi||^2 + lambda D/(eps K) ||grad T^{n+1}||^2)
/// with Q the complete set of increment terms produced by the proof.
struct EnergyBalance {
  double e_before = 0.0;
  double e_after = 0.0;
  double numerical_dissipation = 0.0;  // Q^{n+1}
  double physical_dissipation = 0.0;
  double residual() const { return e_after - e_before + numerical_dissipation + physical_dissipation; }
  double relative() const { return std::abs(residual()) / std::abs(e_before); }
};

/// The three inner-product identities whose sum is the energy law, each
/// reported as |lhs| / (sum of |terms|).
struct ProofLines {
  double phase = 0.0;
  double auxiliary = 0.0;
  double temperature = 0.0;
  double max() const { return std::fmax(phase, std::fmax(auxiliary, temperature)); }
};

/// Result of one linear phase solve.
struct PhaseSolve {
  ScalarField phi;
  ScalarField mu;
  int cg_iterations = 0;
};

/// Sub-solutions of one step; the new level is part1 + xi * part2.
struct SplitSolution {
  PhaseSolve first;
  PhaseSolve second;
  ScalarField temp1;
  ScalarField temp2;
};

}  // namespace dendrite

#endif  // DENDRITE_SCHEME_HPP_
