// Command-line driver: single runs, self-convergence ladders, stabiliser
// sweeps and dendrite growth studies.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dendrite/config.hpp"
#include "dendrite/errors.hpp"
#include "dendrite/experiments.hpp"

namespace fs = std::filesystem;
using namespace dendrite;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kSolver = 3, kEnergy = 4 };

struct Common {
  std::string config;
  std::string out;
  std::string scheme;
  std::optional<double> tau;
  std::optional<double> t_end;
  bool deterministic = false;
  bool strict_energy = false;
  std::optional<long> snapshot_every;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory (overrides output.dir)");
  cmd->add_option("--scheme", c.scheme, "Time scheme")->check(CLI::IsMember({"bdf1", "bdf2"}));
  cmd->add_option("--tau", c.tau, "Time step");
  cmd->add_option("--t-end", c.t_end, "Final time");
  cmd->add_flag("--deterministic", c.deterministic, "Run sub-solves sequentially (bit-reproducible)");
  cmd->add_flag("--strict-energy", c.strict_energy, "Abort with exit code 4 if the modified energy rises");
  cmd->add_option("--snapshot-every", c.snapshot_every, "Write phi/T snapshots every N steps");
  cmd->add_flag("-q,--quiet", c.quiet, "Only print the final summary");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.output.dir = c.out;
  if (c.scheme == "bdf1") cfg.scheme = Scheme::bdf1;
  if (c.scheme == "bdf2") cfg.scheme = Scheme::bdf2;
  if (c.tau) cfg.tau = *c.tau;
  if (c.t_end) cfg.t_end = *c.t_end;
  if (c.deterministic) cfg.deterministic = true;
  if (c.strict_energy) cfg.strict_energy = true;
  if (c.snapshot_every) cfg.output.snapshot_every = *c.snapshot_every;
  cfg.validate();
  return cfg;
}

void print_record(const EnergyRecord& r) {
  std::printf("step %6ld  t = %-10.5g  E = %-22.15g  xi = %-12.9f  area = %.6g\n", r.step, r.time, r.e_modified,
              r.xi, r.area);
}

int cmd_run(const Common& c, const std::string& resume) {
  const RunConfig cfg = resolve(c);
  RunOptions o;
  o.out_dir = fs::path(cfg.output.dir);
  if (!resume.empty()) o.resume = fs::path(resume);
  const long every = std::max(1L, cfg.steps() / 20);
  if (!c.quiet) {
    o.on_record = [every](const EnergyRecord& r) {
      if (r.step % every == 0) print_record(r);
    };
  }
  const RunResult r = simulate(cfg, o);
  print_record(r.ledger.back());
  std::printf("steps %zu  max|xi-1| = %.3e  min A1 = %.6g  max identity residual = %.3e  energy %s\n",
              r.ledger.size() - 1, r.max_xi_deviation(), r.min_a1(), r.max_identity_residual(),
              r.energy_monotone() ? "monotone" : "NOT monotone");
  std::printf("outputs in %s\n", cfg.output.dir.c_str());
  return kOk;
}

int cmd_accuracy(const Common& c, const std::vector<double>& ladder, double reference_tau) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output.dir);
  fs::create_directories(out);
  save_config(cfg, out / "config.cfg");
  const ConvergenceReport rep = run_accuracy(cfg, ladder, reference_tau, out);
  std::printf("%s self-convergence at t = %g, reference tau = %g\n", to_string(cfg.scheme), rep.time,
              rep.reference_tau);
  std::printf("%12s %16s %16s\n", "tau", "L2 err phi", "L2 err T");
  for (std::size_t k = 0; k < rep.taus.size(); ++k) {
    std::printf("%12.4g %16.6e %16.6e\n", rep.taus[k], rep.error_phi[k], rep.error_temp[k]);
  }
  std::printf("slope phi = %.4f  slope T = %.4f  asymptotic check %s\n", rep.slope_phi, rep.slope_temp,
              rep.richardson_ok() ? "ok" : "FAILED");
  return kOk;
}

int cmd_stability(const Common& c, const std::vector<double>& taus, long steps) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output.dir);
  fs::create_directories(out);
  save_config(cfg, out / "config.cfg");
  const auto runs = run_stability(cfg, taus, default_stabilizer_sets(), steps, out);
  std::printf("%-28s %10s %14s %14s %10s\n", "stabilisers", "tau", "max|xi-1|", "min A1", "energy");
  bool all_monotone = true;
  for (const StabilityRun& s : runs) {
    std::printf("%-28s %10.4g %14.6e %14.6g %10s\n", s.set.label().c_str(), s.tau, s.max_xi_deviation, s.min_a1,
                s.energy_monotone ? "monotone" : "RISES");
    all_monotone = all_monotone && s.energy_monotone;
  }
  if (!all_monotone && cfg.strict_energy) return kEnergy;
  return kOk;
}

int cmd_dendrite(const Common& c, const std::vector<double>& latents, const std::vector<double>& times) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output.dir);
  fs::create_directories(out);
  save_config(cfg, out / "config.cfg");
  DendriteOptions o;
  o.out_dir = out;
  if (c.t_end) o.t_end = *c.t_end;
  if (!times.empty()) o.times = times;
  const auto runs = run_dendrite(cfg, latents, o);
  for (const DendriteRun& d : runs) {
    const EnergyRecord& last = d.result.ledger.back();
    std::printf("K = %-5g t = %-6g area = %-10.6g branches = %d (%s)  area %s  energy %s\n", d.latent, last.time,
                last.area, d.branches.branch_count(), d.branches.fourfold() ? "fourfold" : "not fourfold",
                d.result.area_strictly_increasing() ? "increasing" : "NOT increasing",
                d.result.energy_monotone() ? "monotone" : "NOT monotone");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field dendritic growth solver"};
  app.require_subcommand(1);

  Common run_opts, acc_opts, stab_opts, den_opts;
  std::string resume;
  auto* run = app.add_subcommand("run", "Single simulation");
  add_common(run, run_opts);
  run->add_option("--resume", resume, "Continue from a checkpoint file")->check(CLI::ExistingFile);

  std::vector<double> ladder{4e-3, 2e-3, 1e-3, 5e-4};
  double reference_tau = 5e-5;
  auto* acc = app.add_subcommand("accuracy", "Self-convergence study against a fine reference run");
  add_common(acc, acc_opts);
  acc->add_option("--ladder", ladder, "Time steps, strictly decreasing")->delimiter(',')->capture_default_str();
  acc->add_option("--reference-tau", reference_tau, "Reference time step")->capture_default_str();

  std::vector<double> taus{1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  long steps = 200;
  auto* stab = app.add_subcommand("stability", "Time-step and stabiliser sweep");
  add_common(stab, stab_opts);
  stab->add_option("--taus", taus, "Time steps")->delimiter(',')->capture_default_str();
  stab->add_option("--steps", steps, "Steps per run")->capture_default_str();

  std::vector<double> latents{0.6, 0.8, 1.0, 1.2};
  std::vector<double> times;
  auto* den = app.add_subcommand("dendrite", "Dendrite growth for several latent-heat values");
  add_common(den, den_opts);
  den->add_option("--latent", latents, "Latent-heat values K")->delimiter(',')->capture_default_str();
  den->add_option("--times", times, "Snapshot times (default: per-K presets)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(run_opts, resume);
    if (*acc) return cmd_accuracy(acc_opts, ladder, reference_tau);
    if (*stab) return cmd_stability(stab_opts, taus, steps);
    if (*den) return cmd_dendrite(den_opts, latents, times);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const EnergyLawViolation& e) {
    std::cerr << "energy law violated: " << e.what() << '\n';
    return kEnergy;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
