#ifndef DENDRITE_SRC_SCHEME_COMMON_HPP_
#define DENDRITE_SRC_SCHEME_COMMON_HPP_

#include <cmath>
#include <future>
#include <utility>

#include "dendrite/elliptic.hpp"
#include "dendrite/model.hpp"
#include "dendrite/scheme.hpp"

namespace dendrite::detail {

// Solves (rho_scale rho + shift) u - b Lap u = rhs.
inline std::pair<ScalarField, int> solve_phase(const ScalarField& rho, const ModelParams& p, double rho_scale,
                                               double shift, double b, const ScalarField& rhs,
                                               const StepOptions& opts) {
  if (p.mobility.is_constant()) {
    return {helmholtz_solve(p.mobility.constant_value() * rho_scale + shift, b, rhs), 0};
  }
  ScalarField c(rho.grid());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = rho_scale * rho[k] + shift;
  CgResult r = variable_helmholtz_solve(c, b, rhs, opts.cg_tol, opts.cg_maxit);
  return {std::move(r.u), r.iterations};
}

// sum |x| used to normalise proof-line residuals
template <class... T>
double abs_sum(T... v) {
  return (std::abs(v) + ...);
}

inline double relative_to(double lhs, double scale) { return scale > 0.0 ? std::abs(lhs) / scale : 0.0; }

// Runs the four independent solves of a step, concurrently if requested.
template <class F1, class F2, class F3, class F4>
SplitSolution run_split(const StepOptions& opts, F1&& first, F2&& second, F3&& temp1, F4&& temp2) {
  if (!opts.parallel) {
    SplitSolution parts;
    parts.first = first();
    parts.second = second();
    parts.temp1 = temp1();
    parts.temp2 = temp2();
    return parts;
  }
  auto f1 = std::async(std::launch::async, std::forward<F1>(first));
  auto f2 = std::async(std::launch::async, std::forward<F2>(second));
  auto f3 = std::async(std::launch::async, std::forward<F3>(temp1));
  SplitSolution parts;
  parts.temp2 = temp2();
  parts.first = f1.get();
  parts.second = f2.get();
  parts.temp1 = f3.get();
  return parts;
}

}  // namespace dendrite::detail

#endif  // DENDRITE_SRC_SCHEME_COMMON_HPP_
