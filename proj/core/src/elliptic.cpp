#include "dendrite/elliptic.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dendrite/errors.hpp"

namespace dendrite {
namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct DctPlans {
  PlanHandle forward;  // DCT-II in both directions
  PlanHandle inverse;  // DCT-III in both directions, unnormalised
};

// FFTW's planner is not re-entrant; execution of an existing plan on new
// arrays is. Plans are in-place and unaligned so any std::vector works.
const DctPlans& plans_for(int nx, int ny) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, DctPlans> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({nx, ny});
  if (it != cache.end()) return it->second;

  std::vector<double> scratch(static_cast<std::size_t>(nx) * ny);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  DctPlans plans;
  plans.forward.reset(
      fftw_plan_r2r_2d(nx, ny, scratch.data(), scratch.data(), FFTW_REDFT10, FFTW_REDFT10, flags));
  plans.inverse.reset(
      fftw_plan_r2r_2d(nx, ny, scratch.data(), scratch.data(), FFTW_REDFT01, FFTW_REDFT01, flags));
  if (!plans.forward || !plans.inverse) throw SolverError("FFTW failed to create DCT plans");
  return cache.emplace(std::make_pair(nx, ny), std::move(plans)).first->second;
}

}  // namespace

double neumann_eigenvalue(int k, int n, double h) {
  return -(2.0 / (h * h)) * (1.0 - std::cos(std::numbers::pi * k / n));
}

ScalarField helmholtz_solve(double a, double b, const ScalarField& rhs) {
  if (!(a > 0.0)) throw std::invalid_argument("helmholtz_solve: a must be positive");
  if (!(b >= 0.0)) throw std::invalid_argument("helmholtz_solve: b must be non-negative");
  if (!rhs.all_finite()) throw SolverError("helmholtz_solve: right-hand side is not finite");

  const GridSpec& g = rhs.grid();
  if (b == 0.0) {
    ScalarField u = rhs;
    if (a != 1.0) u *= 1.0 / a;
    return u;
  }

  const DctPlans& plans = plans_for(g.nx, g.ny);
  std::vector<double> work(rhs.values().begin(), rhs.values().end());
  fftw_execute_r2r(plans.forward.get(), work.data(), work.data());

  std::vector<double> lx(g.nx), ly(g.ny);
  for (int k = 0; k < g.nx; ++k) lx[k] = neumann_eigenvalue(k, g.nx, g.hx());
  for (int l = 0; l < g.ny; ++l) ly[l] = neumann_eigenvalue(l, g.ny, g.hy());

  const double norm = 4.0 * g.nx * g.ny;
  for (int k = 0; k < g.nx; ++k) {
    for (int l = 0; l < g.ny; ++l) {
      work[g.index(k, l)] /= norm * (a - b * (lx[k] + ly[l]));
    }
  }
  fftw_execute_r2r(plans.inverse.get(), work.data(), work.data());

  ScalarField u(g);
  std::copy(work.begin(), work.end(), u.values().begin());
  return u;
}

ScalarField apply_helmholtz(const ScalarField& c, double b, const ScalarField& u) {
  require_conformable(c, u);
  ScalarField out = laplacian(u);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = c[k] * u[k] - b * out[k];
  return out;
}

ScalarField apply_helmholtz(double a, double b, const ScalarField& u) {
  ScalarField out = laplacian(u);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * u[k] - b * out[k];
  return out;
}

CgResult variable_helmholtz_solve(const ScalarField& c, double b, const ScalarField& rhs, double tol,
                                  int maxit) {
  require_conformable(c, rhs);
  if (!(c.min() > 0.0)) throw std::invalid_argument("variable_helmholtz_solve: c must be positive");
  if (!(b >= 0.0)) throw std::invalid_argument("variable_helmholtz_solve: b must be non-negative");
  if (!rhs.all_finite()) throw SolverError("variable_helmholtz_solve: right-hand side is not finite");

  const double a_mean = c.mean();
  const double rhs_norm = std::sqrt(norm_sq(rhs));

  CgResult result;
  result.u = helmholtz_solve(a_mean, b, rhs);
  if (rhs_norm == 0.0) return result;

  ScalarField r = rhs - apply_helmholtz(c, b, result.u);
  double res = std::sqrt(norm_sq(r)) / rhs_norm;
  if (res <= tol) {
    result.relative_residual = res;
    return result;
  }

  ScalarField z = helmholtz_solve(a_mean, b, r);
  ScalarField p = z;
  double rz = inner(r, z);
  for (int it = 1; it <= maxit; ++it) {
    const ScalarField ap = apply_helmholtz(c, b, p);
    const double alpha = rz / inner(p, ap);
    result.u.axpy(alpha, p);
    r.axpy(-alpha, ap);
    res = std::sqrt(norm_sq(r)) / rhs_norm;
    result.iterations = it;
    result.relative_residual = res;
    if (res <= tol) return result;

    z = helmholtz_solve(a_mean, b, r);
    const double rz_next = inner(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = z[k] + beta * p[k];
  }
  std::ostringstream os;
  os << "variable_helmholtz_solve: no convergence after " << maxit
     << " iterations (relative residual " << res << ")";
  throw SolverError(os.str(), res);
}

}  // namespace dendrite
