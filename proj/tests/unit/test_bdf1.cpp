#include <cmath>
#include <vector>

#include "doctest.h"
#include "dendrite/bdf1.hpp"
#include "dendrite/errors.hpp"
#include "test_support.hpp"

using namespace dendrite;
using support::Rng;
using support::square;

namespace {

SplitSolution split(const bdf1::State& s, const bdf1::Explicit& ex, double tau, const ModelParams& p,
                    const ScalarField* src_phi = nullptr, const ScalarField* src_temp = nullptr) {
  SplitSolution parts;
  parts.first = bdf1::solve_phi1_mu1(s, ex, tau, p, src_phi);
  parts.second = bdf1::solve_phi2_mu2(s, ex, tau, p);
  parts.temp1 = bdf1::solve_temp1(s, tau, p, src_temp);
  parts.temp2 = bdf1::solve_temp2(s, ex, tau, p);
  return parts;
}

// Arbitrary but smooth level-n data with an independent mu and R.
bdf1::State random_state(Rng& rng, const GridSpec& g, const ModelParams& p) {
  bdf1::State s;
  s.phi = rng.smooth_field(g, 0.8);
  s.temp = rng.smooth_field(g, 0.5);
  s.mu = rng.smooth_field(g, 20.0);
  s.r = std::sqrt(e1_energy(s.phi, p)) * rng.uniform(0.9, 1.1);
  return s;
}

ModelParams random_params(Rng& rng, bool variable_mobility) {
  ModelParams p = support::case2_params();
  p.sigma = rng.uniform(0.0, 0.1);
  p.s1 = rng.uniform(0.0, 0.8);
  p.s2 = rng.uniform(0.0, 10.0);
  p.s3 = rng.uniform(0.0, 5.0);
  p.s4 = rng.uniform(0.0, 5.0);
  p.lambda = rng.uniform(0.1, 2.0);
  p.latent = rng.uniform(0.1, 1.5);
  if (variable_mobility) p.mobility = Mobility::linear(rng.uniform(500, 1500), rng.uniform(500, 1500));
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// ||x|| / ||scale|| for residual fields
double rel_norm(const ScalarField& residual, const ScalarField& scale) {
  return std::sqrt(norm_sq(residual)) / std::max(std::sqrt(norm_sq(scale)), 1e-300);
}

}  // namespace

TEST_CASE("initial state from zero fields") {
  const ModelParams p = support::case2_params();
  const GridSpec g = square(16);
  const bdf1::State s = bdf1::init_state(ScalarField(g), ScalarField(g), p);
  CHECK(s.r == doctest::Approx(std::sqrt(4.0 * (1.0 / (4 * p.eps * p.eps) + p.bconst))).epsilon(1e-14));
  CHECK(s.mu.max_abs() == 0.0);
  CHECK(s.t == 0.0);
  CHECK(s.n == 0);
}

TEST_CASE("initial state for the tanh disc") {
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(64));
  const bdf1::State s = bdf1::init_state(phi0, temp0, p);
  CHECK(std::isfinite(s.r));
  CHECK(s.r == doctest::Approx(std::sqrt(e1_energy(phi0, p))).epsilon(1e-15));
  CHECK(s.r == doctest::Approx(135.36850439064122).epsilon(1e-10));
  CHECK(s.mu.all_finite());

  // the temperature only enters through the latent-heat coupling term
  const bdf1::State cold = bdf1::init_state(phi0, ScalarField(phi0.grid()), p);
  const ScalarField expected = -(p.lambda / p.eps) * multiply(latent_heat_derivative(phi0), temp0);
  CHECK((s.mu - cold.mu - expected).max_abs() <= 1e-12 * expected.max_abs());
}

TEST_CASE("initial state rejects a non-positive E1") {
  ModelParams p = support::case2_params();
  p.bconst = 1.0;
  const ScalarField one(square(8), 1.0);
  CHECK_THROWS_AS(bdf1::init_state(one, ScalarField(one.grid()), p), ConfigError);
}

TEST_CASE("first phase solve on zero and constant data") {
  ModelParams p = support::case2_params();
  p.s3 = 2.0;
  p.s4 = 1.5;
  const GridSpec g = square(12);
  const double tau = 0.01;

  bdf1::State s = bdf1::init_state(ScalarField(g), ScalarField(g), p);
  PhaseSolve r = bdf1::solve_phi1_mu1(s, bdf1::prepare(s, p), tau, p);
  CHECK(r.phi.max_abs() == 0.0);
  CHECK(r.mu.max_abs() == 0.0);

  const double c = 0.37, rho = 1e3, ie2 = 1.0 / (p.eps * p.eps);
  s = bdf1::init_state(ScalarField(g, c), ScalarField(g), p);
  r = bdf1::solve_phi1_mu1(s, bdf1::prepare(s, p), tau, p);
  const double expected = c * (rho / tau + p.s3 * ie2) / (rho / tau + (p.s2 + p.s3) * ie2);
  for (std::size_t k = 0; k < r.phi.size(); ++k) CHECK(r.phi[k] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("second phase solve on trivial and unit forcing") {
  ModelParams p = support::case2_params();
  p.s3 = 3.0;
  const GridSpec g = square(12);
  const double tau = 0.05;
  bdf1::State s = bdf1::init_state(ScalarField(g), ScalarField(g), p);
  bdf1::Explicit ex = bdf1::prepare(s, p);
  PhaseSolve r = bdf1::solve_phi2_mu2(s, ex, tau, p);
  CHECK(r.phi.max_abs() == 0.0);
  CHECK(r.mu.max_abs() == 0.0);

  ex.residual = ScalarField(g, 1.0);
  r = bdf1::solve_phi2_mu2(s, ex, tau, p);
  const double m = 1e-3;
  const double expected = -tau * m / (1.0 + tau * m * (p.s2 + p.s3) / (p.eps * p.eps));
  CHECK(expected < 0.0);
  for (std::size_t k = 0; k < r.phi.size(); ++k) CHECK(r.phi[k] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("phase solves satisfy the unreduced equations") {
  Rng rng(40);
  for (int trial = 0; trial < 24; ++trial) {
    const bool variable = trial % 2 == 1;
    const ModelParams p = random_params(rng, variable);
    const GridSpec g = square(rng.integer(8, 24));
    const double tau = std::pow(10.0, rng.uniform(-3, 2));
    const bdf1::State s = random_state(rng, g, p);
    const bdf1::Explicit ex = bdf1::prepare(s, p);
    const double ie2 = 1.0 / (p.eps * p.eps);
    const double tol = variable ? 1e-8 : 1e-10;

    const ScalarField src = rng.smooth_field(g, 0.1);
    const PhaseSolve first = bdf1::solve_phi1_mu1(s, ex, tau, p, &src);
    const ScalarField d1 = first.phi - s.phi;
    ScalarField res(g), scale(g);
    const ScalarField lap_d1 = laplacian(d1);
    for (std::size_t k = 0; k < res.size(); ++k) {
      const double m = 1.0 / ex.rho[k];
      const double lhs = d1[k] / tau;
      const double rhs = m * (first.mu[k] - p.s3 * ie2 * d1[k] + p.s4 * lap_d1[k]) + src[k];
      res[k] = lhs - rhs;
      scale[k] = std::abs(lhs) + std::abs(m * first.mu[k]) + std::abs(src[k]);
    }
    CHECK(rel_norm(res, scale) < tol);
    const ScalarField mu1 = p.s1 * laplacian(first.phi) - p.s2 * ie2 * first.phi;
    CHECK(rel_norm(first.mu - mu1, mu1) < 1e-12);

    const PhaseSolve second = bdf1::solve_phi2_mu2(s, ex, tau, p);
    const ScalarField lap2 = laplacian(second.phi);
    for (std::size_t k = 0; k < res.size(); ++k) {
      const double m = 1.0 / ex.rho[k];
      const double lhs = second.phi[k] / tau;
      const double rhs = m * (second.mu[k] - p.s3 * ie2 * second.phi[k] + p.s4 * lap2[k]);
      res[k] = lhs - rhs;
      scale[k] = std::abs(lhs) + std::abs(m * second.mu[k]);
    }
    CHECK(rel_norm(res, scale) < tol);
    ScalarField mu2 = -1.0 * ex.residual + p.s1 * lap2 - p.s2 * ie2 * second.phi;
    mu2.axpy(-p.lambda / p.eps, multiply(ex.hprime, s.temp));
    CHECK(rel_norm(second.mu - mu2, mu2) < 1e-12);
  }
}

TEST_CASE("temperature solves") {
  const ModelParams p = support::case2_params();
  const GridSpec g = square(16);
  bdf1::State s = bdf1::init_state(ScalarField(g, 0.2), ScalarField(g, -0.4), p);
  s.mu = ScalarField(g);
  const bdf1::Explicit ex = bdf1::prepare(s, p);
  const ScalarField t1 = bdf1::solve_temp1(s, 0.3, p);
  for (std::size_t k = 0; k < t1.size(); ++k) CHECK(t1[k] == doctest::Approx(-0.4).epsilon(1e-14));
  CHECK(bdf1::solve_temp2(s, ex, 0.3, p).max_abs() == 0.0);

  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    bdf1::State r = random_state(rng, g, p);
    r.temp = rng.field(g);
    const double tau = std::pow(10.0, rng.uniform(-3, 2));
    const ScalarField t = bdf1::solve_temp1(r, tau, p);
    CHECK(std::abs(t.mean() - r.temp.mean()) < 1e-12);
    // heat equation residual
    const ScalarField res = (1.0 / tau) * (t - r.temp) - p.diff * laplacian(t);
    CHECK(std::sqrt(norm_sq(res)) <= 1e-10 * (1.0 / tau) * std::sqrt(norm_sq(r.temp)));

    const bdf1::Explicit e = bdf1::prepare(r, p);
    const ScalarField t2 = bdf1::solve_temp2(r, e, tau, p);
    ScalarField src(g);
    for (std::size_t k = 0; k < src.size(); ++k) src[k] = p.latent * e.hprime[k] * r.mu[k] / e.rho[k];
    const ScalarField res2 = (1.0 / tau) * t2 - p.diff * laplacian(t2) - src;
    CHECK(std::sqrt(norm_sq(res2)) <= 1e-10 * std::sqrt(norm_sq(src)));
  }
}

TEST_CASE("closure in the decoupled limit") {
  Rng rng(42);
  const ModelParams p = support::case2_params();
  const GridSpec g = square(12);
  const bdf1::State s = random_state(rng, g, p);
  const bdf1::Explicit ex = bdf1::prepare(s, p);
  SplitSolution parts = split(s, ex, 0.01, p);
  parts.second.phi = ScalarField(g);
  parts.second.mu = ScalarField(g);
  parts.temp2 = ScalarField(g);
  const StepReport rep = bdf1::compute_xi(s, ex, 0.01, p, parts);
  CHECK(rep.a1 == doctest::Approx(2.0 * ex.e1).epsilon(1e-15));
  CHECK(rep.xi == doctest::Approx(s.r / std::sqrt(ex.e1)).epsilon(1e-13));
  CHECK(rep.r_new == doctest::Approx(s.r).epsilon(1e-13));
}

TEST_CASE("simplified closure coefficients equal the raw ones") {
  Rng rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const ModelParams p = random_params(rng, trial % 3 == 2);
    const GridSpec g = square(rng.integer(8, 20));
    const double tau = std::pow(10.0, rng.uniform(-3, 2));
    const bdf1::State s = random_state(rng, g, p);
    const bdf1::Explicit ex = bdf1::prepare(s, p);
    const SplitSolution parts = split(s, ex, tau, p);
    const StepReport rep = bdf1::compute_xi(s, ex, tau, p, parts);

    const double ie2 = 1.0 / (p.eps * p.eps);
    const double c = tau * p.lambda / p.eps;
    ScalarField hm(g), hmt(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      hm[k] = ex.hprime[k] / ex.rho[k];
      hmt[k] = hm[k] * s.temp[k];
    }
    const ScalarField& phi1 = parts.first.phi;
    const ScalarField& phi2 = parts.second.phi;
    const ScalarField d1 = phi1 - s.phi;

    const double a1_raw = 2.0 * ex.e1 - inner(ex.residual, phi2) +
                          c * (inner(hm, multiply(s.mu, parts.temp2)) - inner(hm, multiply(s.temp, parts.second.mu))) +
                          c * inner(hmt, p.s3 * ie2 * phi2 - p.s4 * laplacian(phi2));
    const double a2_raw = 2.0 * std::sqrt(ex.e1) * s.r + inner(ex.residual, d1) -
                          c * (inner(hm, multiply(s.mu, parts.temp1)) - inner(hm, multiply(s.temp, parts.first.mu))) -
                          c * inner(hmt, p.s3 * ie2 * d1 - p.s4 * laplacian(d1));
    const double tol = p.mobility.is_constant() ? 1e-9 : 1e-7;
    CHECK(rel(rep.a1, a1_raw) < tol);
    CHECK(rel(rep.a2, a2_raw) < tol);
    CHECK(rep.a1 > 0.0);
  }
}

TEST_CASE("a full step satisfies the unreduced coupled system") {
  Rng rng(44);
  for (int trial = 0; trial < 16; ++trial) {
    const ModelParams p = random_params(rng, trial % 4 == 3);
    const GridSpec g = square(rng.integer(8, 20));
    const double tau = std::pow(10.0, rng.uniform(-3, 2));
    const bdf1::State s = random_state(rng, g, p);
    const auto [next, rep] = bdf1::step(s, tau, p);
    const double tol = p.mobility.is_constant() ? 1e-9 : 1e-7;

    const double ie2 = 1.0 / (p.eps * p.eps);
    const double coupling = p.lambda / p.eps;
    const ScalarField rho = p.mobility.rho(s.phi);
    const ScalarField g_n = stabilized_residual(s.phi, p);
    const ScalarField hp = latent_heat_derivative(s.phi);
    const double e1 = e1_energy(s.phi, p);
    const double xi = next.r / std::sqrt(e1);
    CHECK(xi == doctest::Approx(rep.xi).epsilon(1e-14));

    const ScalarField dphi = next.phi - s.phi;
    const ScalarField lap_d = laplacian(dphi);
    const ScalarField lap_new = laplacian(next.phi);
    ScalarField r_phase(g), s_phase(g), r_mu(g), s_mu(g), r_temp(g), s_temp(g);
    const ScalarField lap_t = laplacian(next.temp);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double m = 1.0 / rho[k];
      r_phase[k] = dphi[k] / tau - m * (next.mu[k] - p.s3 * ie2 * dphi[k] + p.s4 * lap_d[k]);
      s_phase[k] = std::abs(dphi[k] / tau) + std::abs(m * next.mu[k]);
      const double mu = -xi * g_n[k] - xi * coupling * hp[k] * s.temp[k] + p.s1 * lap_new[k] - p.s2 * ie2 * next.phi[k];
      r_mu[k] = next.mu[k] - mu;
      s_mu[k] = std::abs(mu);
      r_temp[k] = (next.temp[k] - s.temp[k]) / tau - p.diff * lap_t[k] - xi * p.latent * hp[k] * m * s.mu[k];
      s_temp[k] = std::abs((next.temp[k] - s.temp[k]) / tau) + std::abs(p.diff * lap_t[k]);
    }
    CHECK(rel_norm(r_phase, s_phase) < tol);
    CHECK(rel_norm(r_mu, s_mu) < 1e-10);
    CHECK(rel_norm(r_temp, s_temp) < 1e-10);

    // auxiliary variable equation
    ScalarField hm_mu(g), hm_t(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      hm_mu[k] = coupling * hp[k] / rho[k];
      hm_t[k] = hm_mu[k] * s.temp[k];
    }
    const double lhs = (next.r - s.r) / tau;
    const double bracket = inner(g_n, dphi) / tau -
                           (inner(hm_mu, multiply(s.mu, next.temp)) - inner(hm_mu, multiply(next.mu, s.temp))) -
                           inner(hm_t, p.s3 * ie2 * dphi - p.s4 * lap_d);
    const double rhs = bracket / (2.0 * std::sqrt(e1));
    CHECK(std::abs(lhs - rhs) <= tol * (std::abs(lhs) + std::abs(rhs) + std::sqrt(e1) / tau * 1e-3));
  }
}

TEST_CASE("energy law and proof lines hold for every time step") {
  Rng rng(45);
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(32));
  for (const double tau : {1e-3, 1e-1, 1.0, 10.0, 100.0}) {
    bdf1::State s = bdf1::init_state(phi0, temp0, p);
    double e_prev = bdf1::modified_energy(s, p);
    for (int n = 0; n < 20; ++n) {
      auto [next, rep] = bdf1::step(s, tau, p);
      CHECK(rep.a1 > 0.0);
      CHECK(rep.identity_residual <= 1e-9);
      CHECK(bdf1::proof_lines(s, next, tau, p).max() <= 1e-9);
      const EnergyBalance b = bdf1::energy_balance(s, next, tau, p);
      CHECK(b.numerical_dissipation >= 0.0);
      CHECK(b.physical_dissipation >= 0.0);
      const double e = bdf1::modified_energy(next, p);
      CHECK(e <= e_prev + 1e-9 * std::abs(e_prev));
      e_prev = e;
      s = std::move(next);
    }
  }
}

TEST_CASE("energy law on random states with all stabilisers") {
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = random_params(rng, false);
    const GridSpec g = square(rng.integer(8, 24));
    const double tau = std::pow(10.0, rng.uniform(-3, 2));
    const bdf1::State s = random_state(rng, g, p);
    const auto [next, rep] = bdf1::step(s, tau, p);
    CHECK(rep.identity_residual <= 1e-9);
    CHECK(bdf1::proof_lines(s, next, tau, p).max() <= 1e-9);
    CHECK(bdf1::modified_energy(next, p) <= bdf1::modified_energy(s, p) * (1 + 1e-9));
  }
}

TEST_CASE("variable mobility keeps the energy law") {
  ModelParams p = support::case2_params();
  p.mobility = Mobility::linear(800.0, 1200.0);
  const auto [phi0, temp0] = support::case2_initial(square(32));
  bdf1::State s = bdf1::init_state(phi0, temp0, p);
  for (int n = 0; n < 10; ++n) {
    auto [next, rep] = bdf1::step(s, 0.1, p);
    CHECK(rep.cg_iterations > 0);
    CHECK(rep.identity_residual <= 1e-7);
    CHECK(bdf1::modified_energy(next, p) <= bdf1::modified_energy(s, p) * (1 + 1e-9));
    s = std::move(next);
  }
}

TEST_CASE("pure phases are steady states") {
  const ModelParams p = support::case2_params();
  for (const double phase : {1.0, -1.0}) {
    for (const double temp : {0.0, 0.3}) {
      const GridSpec g = square(16);
      bdf1::State s = bdf1::init_state(ScalarField(g, phase), ScalarField(g, temp), p);
      CHECK(s.mu.max_abs() < 1e-9);
      for (int n = 0; n < 5; ++n) {
        auto [next, rep] = bdf1::step(s, 0.5, p);
        CHECK(rep.xi == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((next.phi - s.phi).max_abs() < 1e-12);
        CHECK((next.temp - s.temp).max_abs() < 1e-12);
        s = std::move(next);
      }
    }
  }
}

TEST_CASE("recombination is affine in xi") {
  Rng rng(47);
  const ModelParams p = random_params(rng, false);
  const GridSpec g = square(16);
  const bdf1::State s = random_state(rng, g, p);
  const double tau = 0.02;
  const bdf1::Explicit ex = bdf1::prepare(s, p);
  const SplitSolution parts = split(s, ex, tau, p);
  const auto [next, rep] = bdf1::step(s, tau, p);

  ScalarField phi = parts.first.phi;
  phi.axpy(rep.xi, parts.second.phi);
  CHECK(phi == next.phi);
  ScalarField temp = parts.temp1;
  temp.axpy(rep.xi, parts.temp2);
  CHECK(temp == next.temp);

  for (const double xi : {0.0, 0.5, 2.0, -1.0}) {
    ScalarField a = parts.first.phi;
    a.axpy(xi, parts.second.phi);
    const ScalarField expected = next.phi + (xi - rep.xi) * parts.second.phi;
    CHECK((a - expected).max_abs() <= 1e-12 * (1.0 + a.max_abs()));
  }
}

TEST_CASE("increments shrink linearly and xi tends to one") {
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(32));
  const bdf1::State s0 = bdf1::init_state(phi0, temp0, p);
  std::vector<double> incr, dev;
  for (const double tau : {4e-3, 2e-3, 1e-3, 5e-4}) {
    const auto [next, rep] = bdf1::step(s0, tau, p);
    incr.push_back(std::sqrt(norm_sq(next.phi - s0.phi)));
    dev.push_back(std::abs(rep.xi - 1.0));
  }
  for (std::size_t k = 1; k < incr.size(); ++k) {
    CHECK(incr[k - 1] / incr[k] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(dev[k] < dev[k - 1]);
  }
}

TEST_CASE("sources only enter the first sub-solutions") {
  Rng rng(48);
  const ModelParams p = support::case2_params();
  const GridSpec g = square(12);
  const bdf1::State s = random_state(rng, g, p);
  const bdf1::Explicit ex = bdf1::prepare(s, p);
  const ScalarField sp = rng.smooth_field(g), st = rng.smooth_field(g);
  const SplitSolution with = split(s, ex, 0.01, p, &sp, &st);
  const SplitSolution without = split(s, ex, 0.01, p);
  CHECK(with.second.phi == without.second.phi);
  CHECK(with.temp2 == without.temp2);
  CHECK_FALSE(with.first.phi == without.first.phi);
  CHECK_FALSE(with.temp1 == without.temp1);

  SourceTerms src;
  src.phi = [&](const GridSpec&, double) { return sp; };
  const auto [next, rep] = bdf1::step(s, 0.01, p, src);
  CHECK(std::isnan(rep.identity_residual));
  CHECK(next.phi.all_finite());
}

TEST_CASE("parallel sub-solves give bit-identical steps") {
  Rng rng(49);
  const ModelParams p = random_params(rng, false);
  const bdf1::State s = random_state(rng, square(24), p);
  StepOptions par;
  par.parallel = true;
  const auto [a, ra] = bdf1::step(s, 0.1, p);
  const auto [b, rb] = bdf1::step(s, 0.1, p, {}, par);
  CHECK(a.phi == b.phi);
  CHECK(a.temp == b.temp);
  CHECK(a.mu == b.mu);
  CHECK(a.r == b.r);
}
