#ifndef DENDRITE_ELLIPTIC_HPP_
#define DENDRITE_ELLIPTIC_HPP_

#include "dendrite/grid.hpp"

namespace dendrite {

/// Eigenvalue of the 1D cell-centred Neumann second difference for cosine
/// mode k on n cells of width h: -(2/h^2)(1 - cos(k pi / n)).
double neumann_eigenvalue(int k, int n, double h);

/// Solves (a I - b Lap_h) u = rhs exactly by a 2D DCT-II / DCT-III pair.
///
/// Requires a > 0 and b >= 0 (std::invalid_argument otherwise); a non-finite
/// rhs raises SolverError. Thread-safe: transform plans are shared, scratch
/// storage is per call.
ScalarField helmholtz_solve(double a, double b, const ScalarField& rhs);

/// Applies (c I - b Lap_h) to u.
ScalarField apply_helmholtz(const ScalarField& c, double b, const ScalarField& u);
ScalarField apply_helmholtz(double a, double b, const ScalarField& u);

struct CgResult {
  ScalarField u;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves (c(x) I - b Lap_h) u = rhs with conjugate gradients, preconditioned
/// by the constant-coefficient solve with a = mean(c).
///
/// Stops once ||r|| <= tol ||rhs||. Throws std::invalid_argument when
/// min(c) <= 0 or b < 0, SolverError (carrying the last residual) after maxit
/// iterations without convergence.
CgResult variable_helmholtz_solve(const ScalarField& c, double b, const ScalarField& rhs,
                                  double tol = 1e-10, int maxit = 500);

}  // namespace dendrite

#endif  // DENDRITE_ELLIPTIC_HPP_
