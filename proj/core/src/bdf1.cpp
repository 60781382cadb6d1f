#include "dendrite/bdf1.hpp"

#include <cmath>
#include <sstream>

#include "dendrite/errors.hpp"
#include "scheme_common.hpp"

namespace dendrite::bdf1 {

ScalarField chemical_potential(const ScalarField& phi, const ScalarField& temp, const ModelParams& p) {
  require_conformable(phi, temp);
  const ScalarField g = stabilized_residual(phi, p);
  const ScalarField lap = laplacian(phi);
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double coupling = p.lambda / p.eps;
  ScalarField mu(phi.grid());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    mu[k] = -g[k] + p.s1 * lap[k] - p.s2 * inv_eps2 * phi[k] -
            coupling * latent_heat_derivative(phi[k]) * temp[k];
  }
  return mu;
}

State init_state(const ScalarField& phi0, const ScalarField& temp0, const ModelParams& p) {
  require_conformable(phi0, temp0);
  State s;
  s.phi = phi0;
  s.temp = temp0;
  s.r = std::sqrt(e1_energy(phi0, p));
  s.mu = chemical_potential(phi0, temp0, p);
  return s;
}

Explicit prepare(const State& s, const ModelParams& p) {
  Explicit ex;
  ex.rho = p.mobility.rho(s.phi);
  ex.residual = stabilized_residual(s.phi, p);
  ex.hprime = latent_heat_derivative(s.phi);
  ex.e1 = e1_energy(s.phi, p);
  return ex;
}

PhaseSolve solve_phi1_mu1(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const ScalarField* source_phi, const StepOptions& opts) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const ScalarField lap_n = laplacian(s.phi);
  ScalarField rhs(s.phi.grid());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] = ex.rho[k] * s.phi[k] / tau + p.s3 * inv_eps2 * s.phi[k] - p.s4 * lap_n[k];
    if (source_phi) rhs[k] += ex.rho[k] * (*source_phi)[k];
  }
  auto [phi1, its] = detail::solve_phase(ex.rho, p, 1.0 / tau, (p.s2 + p.s3) * inv_eps2, p.s1 + p.s4, rhs, opts);

  ScalarField mu1 = laplacian(phi1);
  for (std::size_t k = 0; k < mu1.size(); ++k) mu1[k] = p.s1 * mu1[k] - p.s2 * inv_eps2 * phi1[k];
  return {std::move(phi1), std::move(mu1), its};
}

PhaseSolve solve_phi2_mu2(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const StepOptions& opts) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double coupling = p.lambda / p.eps;
  ScalarField forcing(s.phi.grid());
  for (std::size_t k = 0; k < forcing.size(); ++k) {
    forcing[k] = -ex.residual[k] - coupling * ex.hprime[k] * s.temp[k];
  }
  auto [phi2, its] =
      detail::solve_phase(ex.rho, p, 1.0 / tau, (p.s2 + p.s3) * inv_eps2, p.s1 + p.s4, forcing, opts);

  ScalarField mu2 = laplacian(phi2);
  for (std::size_t k = 0; k < mu2.size(); ++k) {
    mu2[k] = forcing[k] + p.s1 * mu2[k] - p.s2 * inv_eps2 * phi2[k];
  }
  return {std::move(phi2), std::move(mu2), its};
}

ScalarField solve_temp1(const State& s, double tau, const ModelParams& p, const ScalarField* source_temp) {
  ScalarField rhs = s.temp;
  rhs *= 1.0 / tau;
  if (source_temp) rhs += *source_temp;
  return helmholtz_solve(1.0 / tau, p.diff, rhs);
}

ScalarField solve_temp2(const State& s, const Explicit& ex, double tau, const ModelParams& p) {
  ScalarField rhs(s.phi.grid());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] = p.latent * ex.hprime[k] * s.mu[k] / ex.rho[k];
  }
  return helmholtz_solve(1.0 / tau, p.diff, rhs);
}

StepReport compute_xi(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                      const SplitSolution& parts) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double w = p.temp_weight();
  const ScalarField& phi1 = parts.first.phi;
  const ScalarField& phi2 = parts.second.phi;
  const ScalarField& mu2 = parts.second.mu;

  ScalarField weighted(phi2.grid());
  for (std::size_t k = 0; k < weighted.size(); ++k) {
    weighted[k] = (ex.rho[k] / tau + (p.s2 + p.s3) * inv_eps2) * phi2[k];
  }
  const double a1 = 2.0 * ex.e1 + inner(weighted, phi2) + (p.s1 + p.s4) * grad_norm_sq(phi2) +
                    w * (norm_sq(parts.temp2) + tau * p.diff * grad_norm_sq(parts.temp2));

  const ScalarField lap2 = laplacian(phi2);
  const ScalarField lapt2 = laplacian(parts.temp2);
  ScalarField left(phi2.grid()), dphi(phi2.grid()), tleft(phi2.grid());
  for (std::size_t k = 0; k < left.size(); ++k) {
    left[k] = mu2[k] - p.s1 * lap2[k] + p.s2 * inv_eps2 * phi2[k];
    dphi[k] = phi1[k] - s.phi[k];
    tleft[k] = -parts.temp2[k] + tau * p.diff * lapt2[k];
  }
  const double a2 = 2.0 * std::sqrt(ex.e1) * s.r - inner(left, dphi) + w * inner(tleft, parts.temp1);

  if (!(a1 > 0.0)) {
    std::ostringstream os;
    os << "xi closure: A1 = " << a1 << " is not positive (E1 = " << ex.e1 << ", step " << s.n << ")";
    throw SolverError(os.str());
  }
  StepReport rep;
  rep.a1 = a1;
  rep.a2 = a2;
  rep.xi = a2 / a1;
  rep.e1 = ex.e1;
  rep.r_new = rep.xi * std::sqrt(ex.e1);
  rep.cg_iterations = parts.first.cg_iterations + parts.second.cg_iterations;
  return rep;
}

std::pair<State, StepReport> step(const State& s, double tau, const ModelParams& p, const SourceTerms& sources,
                                  const StepOptions& opts) {
  const Explicit ex = prepare(s, p);
  const double t_new = s.t + tau;
  ScalarField sphi, stemp;
  if (sources.phi) sphi = sources.phi(s.phi.grid(), t_new);
  if (sources.temp) stemp = sources.temp(s.phi.grid(), t_new);

  const SplitSolution parts = detail::run_split(
      opts, [&] { return solve_phi1_mu1(s, ex, tau, p, sources.phi ? &sphi : nullptr, opts); },
      [&] { return solve_phi2_mu2(s, ex, tau, p, opts); },
      [&] { return solve_temp1(s, tau, p, sources.temp ? &stemp : nullptr); },
      [&] { return solve_temp2(s, ex, tau, p); });

  StepReport rep = compute_xi(s, ex, tau, p, parts);

  State next;
  next.phi = parts.first.phi;
  next.phi.axpy(rep.xi, parts.second.phi);
  next.mu = parts.first.mu;
  next.mu.axpy(rep.xi, parts.second.mu);
  next.temp = parts.temp1;
  next.temp.axpy(rep.xi, parts.temp2);
  next.r = rep.r_new;
  next.t = t_new;
  next.n = s.n + 1;

  if (opts.check_identity && sources.empty()) {
    rep.identity_residual = energy_balance(s, next, tau, p).relative();
  }
  return {std::move(next), rep};
}

double modified_energy(const State& s, const ModelParams& p) {
  return 0.5 * p.s1 * grad_norm_sq(s.phi) + 0.5 * p.s2 / (p.eps * p.eps) * norm_sq(s.phi) +
         0.5 * p.temp_weight() * norm_sq(s.temp) + s.r * s.r;
}

EnergyBalance energy_balance(const State& before, const State& after, double tau, const ModelParams& p) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double w = p.temp_weight();
  const ScalarField dphi = after.phi - before.phi;
  const ScalarField dtemp = after.temp - before.temp;
  const double dr = after.r - before.r;
  const ScalarField rho = p.mobility.rho(before.phi);

  EnergyBalance b;
  b.e_before = modified_energy(before, p);
  b.e_after = modified_energy(after, p);
  b.numerical_dissipation = 0.5 * (p.s1 + 2.0 * p.s4) * grad_norm_sq(dphi) +
                            0.5 * (p.s2 + 2.0 * p.s3) * inv_eps2 * norm_sq(dphi) + dr * dr +
                            0.5 * w * norm_sq(dtemp);
  b.physical_dissipation = inner(multiply(rho, dphi), dphi) / tau + tau * w * p.diff * grad_norm_sq(after.temp);
  return b;
}

ProofLines proof_lines(const State& before, const State& after, double tau, const ModelParams& p) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double coupling = p.lambda / p.eps;
  const double w = p.temp_weight();
  const ScalarField rho = p.mobility.rho(before.phi);
  const ScalarField g = stabilized_residual(before.phi, p);
  const ScalarField hp = latent_heat_derivative(before.phi);
  const double xi = after.r / std::sqrt(e1_energy(before.phi, p));
  const ScalarField dphi = after.phi - before.phi;
  const ScalarField dtemp = after.temp - before.temp;

  ScalarField hpt(rho.grid()), hpm_mu(rho.grid());
  for (std::size_t k = 0; k < hpt.size(); ++k) {
    hpt[k] = coupling * hp[k] * before.temp[k];
    hpm_mu[k] = hp[k] * before.mu[k] / rho[k];
  }
  const double g_dphi = inner(g, dphi);
  const double hpt_dphi = inner(hpt, dphi);
  const double coupling_t = inner(hpm_mu, after.temp);

  ProofLines out;
  {
    const double t1 = 2.0 / tau * inner(multiply(rho, dphi), dphi);
    const double t2 = 2.0 * p.s3 * inv_eps2 * norm_sq(dphi);
    const double t3 = 2.0 * p.s4 * grad_norm_sq(dphi);
    const double t4 = 2.0 * xi * g_dphi;
    const double t5 = p.s1 * (grad_norm_sq(after.phi) - grad_norm_sq(before.phi) + grad_norm_sq(dphi));
    const double t6 = p.s2 * inv_eps2 * (norm_sq(after.phi) - norm_sq(before.phi) + norm_sq(dphi));
    const double t7 = 2.0 * xi * hpt_dphi;
    const double lhs = t1 + t2 + t3 + t4 + t5 + t6 + t7;
    out.phase = detail::relative_to(lhs, detail::abs_sum(t1, t2, t3, t4, t5, t6, t7));
  }
  {
    const double dr = after.r - before.r;
    const double t1 = 2.0 * (after.r * after.r - before.r * before.r + dr * dr);
    const double t2 = -2.0 * xi * g_dphi;
    const double t3 = 2.0 * xi * tau * coupling * coupling_t;
    const double t4 = -2.0 * xi * hpt_dphi;
    const double lhs = t1 + t2 + t3 + t4;
    out.auxiliary = detail::relative_to(lhs, detail::abs_sum(t1, t2, t3, t4, 2.0 * after.r * after.r));
  }
  {
    const double t1 = w * (norm_sq(after.temp) - norm_sq(before.temp) + norm_sq(dtemp));
    const double t2 = 2.0 * tau * w * p.diff * grad_norm_sq(after.temp);
    const double t3 = -2.0 * tau * coupling * xi * coupling_t;
    const double lhs = t1 + t2 + t3;
    out.temperature = detail::relative_to(lhs, detail::abs_sum(t1, t2, t3, w * norm_sq(after.temp)));
  }
  return out;
}

}  // namespace dendrite::bdf1
