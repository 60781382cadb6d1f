#include "dendrite/bdf2.hpp"

#include <cmath>
#include <sstream>

#include "dendrite/errors.hpp"
#include "scheme_common.hpp"

namespace dendrite::bdf2 {

namespace {

ScalarField extrapolate(const ScalarField& now, const ScalarField& prev) {
  ScalarField out(now.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 2.0 * now[k] - prev[k];
  return out;
}

// 3 u^{n+1} - 4 u^n + u^{n-1}
ScalarField bdf_difference(const ScalarField& next, const ScalarField& now, const ScalarField& prev) {
  ScalarField out(now.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 3.0 * next[k] - 4.0 * now[k] + prev[k];
  return out;
}

// u^{n+1} - 2 u^n + u^{n-1}
ScalarField second_difference(const ScalarField& next, const ScalarField& now, const ScalarField& prev) {
  ScalarField out(now.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = next[k] - 2.0 * now[k] + prev[k];
  return out;
}

// ||u||^2 + ||2u - v||^2 and the gradient version
double pair_norm(const ScalarField& u, const ScalarField& v) { return norm_sq(u) + norm_sq(extrapolate(u, v)); }
double pair_grad_norm(const ScalarField& u, const ScalarField& v) {
  return grad_norm_sq(u) + grad_norm_sq(extrapolate(u, v));
}

}  // namespace

State initial_state(const bdf1::State& s0) {
  State s;
  s.phi_n = s0.phi;
  s.phi_nm1 = s0.phi;
  s.temp_n = s0.temp;
  s.temp_nm1 = s0.temp;
  s.mu_n = s0.mu;
  s.mu_nm1 = s0.mu;
  s.r_n = s0.r;
  s.r_nm1 = s0.r;
  s.t = s0.t;
  s.n = s0.n;
  return s;
}

Bootstrap bootstrap(const ScalarField& phi0, const ScalarField& temp0, double tau, const ModelParams& p,
                    const SourceTerms& sources, const StepOptions& opts) {
  Bootstrap b;
  b.level0 = bdf1::init_state(phi0, temp0, p);
  auto [s1, rep] = bdf1::step(b.level0, tau, p, sources, opts);
  b.level1 = std::move(s1);
  b.report = rep;

  State& s = b.state;
  s.phi_n = b.level1.phi;
  s.phi_nm1 = b.level0.phi;
  s.temp_n = b.level1.temp;
  s.temp_nm1 = b.level0.temp;
  s.mu_n = b.level1.mu;
  s.mu_nm1 = b.level0.mu;
  s.r_n = b.level1.r;
  s.r_nm1 = b.level0.r;
  s.t = b.level1.t;
  s.n = b.level1.n;
  return b;
}

Explicit prepare(const State& s, const ModelParams& p) {
  Explicit ex;
  ex.phi_bar = extrapolate(s.phi_n, s.phi_nm1);
  ex.temp_bar = extrapolate(s.temp_n, s.temp_nm1);
  ex.mu_bar = extrapolate(s.mu_n, s.mu_nm1);
  ex.rho = p.mobility.rho(ex.phi_bar);
  ex.residual = stabilized_residual(ex.phi_bar, p);
  ex.hprime = latent_heat_derivative(ex.phi_bar);
  ex.e1 = e1_energy(ex.phi_bar, p);
  return ex;
}

PhaseSolve solve_phi1_mu1(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const ScalarField* source_phi, const StepOptions& opts) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const ScalarField lap_bar = laplacian(ex.phi_bar);
  ScalarField rhs(s.phi_n.grid());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] = ex.rho[k] * (4.0 * s.phi_n[k] - s.phi_nm1[k]) / (2.0 * tau) + p.s3 * inv_eps2 * ex.phi_bar[k] -
             p.s4 * lap_bar[k];
    if (source_phi) rhs[k] += ex.rho[k] * (*source_phi)[k];
  }
  auto [phi1, its] =
      detail::solve_phase(ex.rho, p, 1.5 / tau, (p.s2 + p.s3) * inv_eps2, p.s1 + p.s4, rhs, opts);

  ScalarField mu1 = laplacian(phi1);
  for (std::size_t k = 0; k < mu1.size(); ++k) mu1[k] = p.s1 * mu1[k] - p.s2 * inv_eps2 * phi1[k];
  return {std::move(phi1), std::move(mu1), its};
}

PhaseSolve solve_phi2_mu2(const State& s, const Explicit& ex, double tau, const ModelParams& p,
                          const StepOptions& opts) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double coupling = p.lambda / p.eps;
  ScalarField forcing(s.phi_n.grid());
  for (std::size_t k = 0; k < forcing.size(); ++k) {
    forcing[k] = -ex.residual[k] - coupling * ex.hprime[k] * ex.temp_bar[k];
  }
  auto [phi2, its] =
      detail::solve_phase(ex.rho, p, 1.5 / tau, (p.s2 + p.s3) * inv_eps2, p.s1 + p.s4, forcing, opts);

  ScalarField mu2 = laplacian(phi2);
  for (std::size_t k = 0; k < mu2.size(); ++k) {
    mu2[k] = forcing[k] + p.s1 * mu2[k] - p.s2 * inv_eps2 * phi2[k];
  }
  return {std::move(phi2), std::move(mu2), its};
}

ScalarField solve_temp1(const State& s, double tau, const ModelParams& p, const ScalarField* source_temp) {
  ScalarField rhs(s.temp_n.grid());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = (4.0 * s.temp_n[k] - s.temp_nm1[k]) / (2.0 * tau);
  if (source_temp) rhs += *source_temp;
  return helmholtz_solve(1.5 / tau, p.diff, rhs);
}

ScalarField solve_temp2(const State& s, const Explicit& ex, double tau, const ModelParams& p) {
  ScalarField rhs(s.temp_n.grid());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] = p.latent * ex.hprime[k] * ex.mu_bar[k] / ex.rho[k];
  }
  return helmholtz_solve(1.5 / tau, p.diff, rhs);
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
    weighted[k] = (1.5 * ex.rho[k] / tau + (p.s2 + p.s3) * inv_eps2) * phi2[k];
  }
  const double a1 = 3.0 * ex.e1 + 1.5 * (inner(weighted, phi2) + (p.s1 + p.s4) * grad_norm_sq(phi2)) +
                    w * (1.5 * norm_sq(parts.temp2) + tau * p.diff * grad_norm_sq(parts.temp2));

  const ScalarField lap2 = laplacian(phi2);
  const ScalarField lapt2 = laplacian(parts.temp2);
  ScalarField left(phi2.grid()), incr(phi2.grid()), tleft(phi2.grid());
  for (std::size_t k = 0; k < left.size(); ++k) {
    left[k] = mu2[k] - p.s1 * lap2[k] + p.s2 * inv_eps2 * phi2[k];
    incr[k] = 3.0 * phi1[k] - 4.0 * s.phi_n[k] + s.phi_nm1[k];
    tleft[k] = -1.5 * parts.temp2[k] + tau * p.diff * lapt2[k];
  }
  const double a2 = std::sqrt(ex.e1) * (4.0 * s.r_n - s.r_nm1) - 0.5 * inner(left, incr) +
                    w * inner(tleft, parts.temp1);

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
  if (sources.phi) sphi = sources.phi(s.phi_n.grid(), t_new);
  if (sources.temp) stemp = sources.temp(s.phi_n.grid(), t_new);

  const SplitSolution parts = detail::run_split(
      opts, [&] { return solve_phi1_mu1(s, ex, tau, p, sources.phi ? &sphi : nullptr, opts); },
      [&] { return solve_phi2_mu2(s, ex, tau, p, opts); },
      [&] { return solve_temp1(s, tau, p, sources.temp ? &stemp : nullptr); },
      [&] { return solve_temp2(s, ex, tau, p); });

  StepReport rep = compute_xi(s, ex, tau, p, parts);

  State next;
  next.phi_n = parts.first.phi;
  next.phi_n.axpy(rep.xi, parts.second.phi);
  next.mu_n = parts.first.mu;
  next.mu_n.axpy(rep.xi, parts.second.mu);
  next.temp_n = parts.temp1;
  next.temp_n.axpy(rep.xi, parts.temp2);
  next.phi_nm1 = s.phi_n;
  next.mu_nm1 = s.mu_n;
  next.temp_nm1 = s.temp_n;
  next.r_n = rep.r_new;
  next.r_nm1 = s.r_n;
  next.t = t_new;
  next.n = s.n + 1;

  if (opts.check_identity && sources.empty()) rep.identity_residual = identity_check(s, next, tau, p);
  return {std::move(next), rep};
}

double modified_energy(const State& s, const ModelParams& p) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const ScalarField d = s.phi_n - s.phi_nm1;
  const double r_bar = 2.0 * s.r_n - s.r_nm1;
  return 0.25 * (p.s1 * pair_grad_norm(s.phi_n, s.phi_nm1) + p.s2 * inv_eps2 * pair_norm(s.phi_n, s.phi_nm1) +
                 2.0 * p.s3 * inv_eps2 * norm_sq(d) + 2.0 * p.s4 * grad_norm_sq(d) +
                 p.temp_weight() * pair_norm(s.temp_n, s.temp_nm1) + 2.0 * (s.r_n * s.r_n + r_bar * r_bar));
}

EnergyBalance energy_balance(const State& before, const State& after, double tau, const ModelParams& p) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double w = p.temp_weight();
  const ScalarField d2phi = second_difference(after.phi_n, before.phi_n, before.phi_nm1);
  const ScalarField d2temp = second_difference(after.temp_n, before.temp_n, before.temp_nm1);
  const double d2r = after.r_n - 2.0 * before.r_n + before.r_nm1;
  const ScalarField rho = p.mobility.rho(extrapolate(before.phi_n, before.phi_nm1));
  const ScalarField x = bdf_difference(after.phi_n, before.phi_n, before.phi_nm1);

  EnergyBalance b;
  b.e_before = modified_energy(before, p);
  b.e_after = modified_energy(after, p);
  b.numerical_dissipation = 0.25 * (p.s1 + 4.0 * p.s4) * grad_norm_sq(d2phi) +
                            0.25 * (p.s2 + 4.0 * p.s3) * inv_eps2 * norm_sq(d2phi) +
                            0.25 * w * norm_sq(d2temp) + 0.5 * d2r * d2r;
  b.physical_dissipation =
      inner(multiply(rho, x), x) / (4.0 * tau) + tau * w * p.diff * grad_norm_sq(after.temp_n);
  return b;
}

double identity_check(const State& before, const State& after, double tau, const ModelParams& p) {
  return energy_balance(before, after, tau, p).relative();
}

ProofLines proof_lines(const State& before, const State& after, double tau, const ModelParams& p) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  const double coupling = p.lambda / p.eps;
  const double w = p.temp_weight();
  const Explicit ex = prepare(before, p);
  const double xi = after.r_n / std::sqrt(ex.e1);

  const ScalarField& phi_new = after.phi_n;
  const ScalarField& phi_n = before.phi_n;
  const ScalarField& phi_nm1 = before.phi_nm1;
  const ScalarField x = bdf_difference(phi_new, phi_n, phi_nm1);
  const ScalarField d2phi = second_difference(phi_new, phi_n, phi_nm1);
  const ScalarField d_new = phi_new - phi_n;
  const ScalarField d_old = phi_n - phi_nm1;

  ScalarField hpt(x.grid()), hpm_mu(x.grid());
  for (std::size_t k = 0; k < hpt.size(); ++k) {
    hpt[k] = coupling * ex.hprime[k] * ex.temp_bar[k];
    hpm_mu[k] = ex.hprime[k] * ex.mu_bar[k] / ex.rho[k];
  }
  const double g_x = inner(ex.residual, x);
  const double hpt_x = inner(hpt, x);
  const double coupling_t = inner(hpm_mu, after.temp_n);

  ProofLines out;
  {
    const double t1 = inner(multiply(ex.rho, x), x) / tau;
    const double t2 = 2.0 * p.s3 * inv_eps2 * (norm_sq(d_new) - norm_sq(d_old) + 2.0 * norm_sq(d2phi));
    const double t3 =
        2.0 * p.s4 * (grad_norm_sq(d_new) - grad_norm_sq(d_old) + 2.0 * grad_norm_sq(d2phi));
    const double t4 = p.s1 * (pair_grad_norm(phi_new, phi_n) - pair_grad_norm(phi_n, phi_nm1) + grad_norm_sq(d2phi));
    const double t5 = p.s2 * inv_eps2 * (pair_norm(phi_new, phi_n) - pair_norm(phi_n, phi_nm1) + norm_sq(d2phi));
    const double t6 = 2.0 * xi * g_x;
    const double t7 = 2.0 * xi * hpt_x;
    const double lhs = t1 + t2 + t3 + t4 + t5 + t6 + t7;
    out.phase = detail::relative_to(lhs, detail::abs_sum(t1, t2, t3, t4, t5, t6, t7));
  }
  {
    const double rn1 = after.r_n, rn = before.r_n, rm = before.r_nm1;
    const double t1 = 2.0 * (rn1 * rn1 + (2.0 * rn1 - rn) * (2.0 * rn1 - rn) - rn * rn - (2.0 * rn - rm) * (2.0 * rn - rm) +
                             (rn1 - 2.0 * rn + rm) * (rn1 - 2.0 * rn + rm));
    const double t2 = -2.0 * xi * g_x;
    const double t3 = 4.0 * tau * xi * coupling * coupling_t;
    const double t4 = -2.0 * xi * hpt_x;
    const double lhs = t1 + t2 + t3 + t4;
    out.auxiliary = detail::relative_to(lhs, detail::abs_sum(t1, t2, t3, t4, 2.0 * rn1 * rn1));
  }
  {
    const ScalarField d2temp = second_difference(after.temp_n, before.temp_n, before.temp_nm1);
    const double t1 = w * (pair_norm(after.temp_n, before.temp_n) - pair_norm(before.temp_n, before.temp_nm1) +
                           norm_sq(d2temp));
    const double t2 = 4.0 * tau * w * p.diff * grad_norm_sq(after.temp_n);
    const double t3 = -4.0 * tau * coupling * xi * coupling_t;
    const double lhs = t1 + t2 + t3;
    out.temperature = detail::relative_to(lhs, detail::abs_sum(t1, t2, t3, w * norm_sq(after.temp_n)));
  }
  return out;
}

}  // namespace dendrite::bdf2
