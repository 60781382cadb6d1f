#include "dendrite/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dendrite/bdf1.hpp"
#include "dendrite/bdf2.hpp"
#include "dendrite/errors.hpp"
#include "dendrite/snapshot.hpp"

namespace dendrite {

namespace fs = std::filesystem;

std::pair<ScalarField, ScalarField> initial_fields(const RunConfig& c) {
  const InitialCondition& ic = c.initial;
  const GridSpec& g = c.grid;
  auto disc = [&](double x, double y) {
    const double d2 = (x - ic.x0) * (x - ic.x0) + (y - ic.y0) * (y - ic.y0);
    return std::tanh((ic.r0 - d2) / ic.eps0);
  };
  switch (ic.preset) {
    case InitialCondition::Preset::case2_tanh: {
      ScalarField phi = ScalarField::from_function(g, disc);
      ScalarField temp = phi;
      temp *= ic.temp_factor;
      return {std::move(phi), std::move(temp)};
    }
    case InitialCondition::Preset::dendrite_seed: {
      ScalarField phi = ScalarField::from_function(g, disc);
      ScalarField temp(g);
      for (std::size_t k = 0; k < temp.size(); ++k) temp[k] = phi[k] > 0.0 ? 0.0 : -ic.undercool;
      return {std::move(phi), std::move(temp)};
    }
    case InitialCondition::Preset::uniform:
      return {ScalarField(g, ic.phi_value), ScalarField(g, ic.temp_value)};
    case InitialCondition::Preset::files: {
      FieldSnapshot phi = read_snapshot(ic.phi_file);
      FieldSnapshot temp = read_snapshot(ic.temp_file);
      if (!(phi.field.grid() == g) || !(temp.field.grid() == g)) {
        throw ConfigError("initial snapshot files do not match the configured grid");
      }
      return {std::move(phi.field), std::move(temp.field)};
    }
  }
  throw ConfigError("unknown initial-condition preset");
}

std::string expand_pattern(const std::string& pattern, long n) {
  std::string out;
  const std::string token = "{n}";
  std::size_t pos = 0;
  for (;;) {
    const std::size_t hit = pattern.find(token, pos);
    if (hit == std::string::npos) break;
    out.append(pattern, pos, hit - pos);
    out += std::to_string(n);
    pos = hit + token.size();
  }
  out.append(pattern, pos, std::string::npos);
  return out;
}

SourceTerms file_sources(const RunConfig& c) {
  SourceTerms s;
  auto provider = [tau = c.tau](std::string pattern) {
    return [tau, pattern = std::move(pattern)](const GridSpec& g, double t) {
      const long n = std::lround(t / tau);
      FieldSnapshot snap = read_snapshot(expand_pattern(pattern, n));
      if (!(snap.field.grid() == g)) {
        throw ConfigError("source file for level " + std::to_string(n) + " does not match the grid");
      }
      return std::move(snap.field);
    };
  };
  if (!c.sources.phi_pattern.empty()) s.phi = provider(c.sources.phi_pattern);
  if (!c.sources.temp_pattern.empty()) s.temp = provider(c.sources.temp_pattern);
  return s;
}

double RunResult::max_xi_deviation() const {
  double m = 0.0;
  for (const EnergyRecord& r : ledger) {
    if (r.step >= 1) m = std::max(m, std::abs(r.xi - 1.0));
  }
  return m;
}

double RunResult::min_a1() const {
  double m = std::numeric_limits<double>::infinity();
  for (const EnergyRecord& r : ledger) {
    if (r.step >= 1) m = std::min(m, r.a1);
  }
  return m;
}

double RunResult::max_identity_residual() const {
  double m = 0.0;
  for (const EnergyRecord& r : ledger) m = std::max(m, r.identity_residual);
  return m;
}

bool RunResult::area_strictly_increasing() const {
  for (std::size_t k = 1; k < ledger.size(); ++k) {
    if (!(ledger[k].area > ledger[k - 1].area)) return false;
  }
  return true;
}

namespace {

std::string step_tag(long n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06ld", n);
  return buf;
}

// Shared bookkeeping of a run: ledger, energy check, snapshots.
class RunSink {
 public:
  RunSink(const RunConfig& c, const RunOptions& opts, RunResult& result) : c_(c), opts_(opts), result_(result) {
    if (opts.out_dir) {
      fs::create_directories(*opts.out_dir);
      save_config(c, *opts.out_dir / "config.cfg");
      ledger_.emplace(*opts.out_dir / "ledger.csv", c.strict_energy);
    }
  }

  void add(const EnergyRecord& r, const ScalarField& phi, const ScalarField& temp) {
    if (!r.all_finite()) {
      throw SolverError("non-finite diagnostics at step " + std::to_string(r.step) + " (t = " +
                        format_real(r.time) + ")");
    }
    const bool rose = !result_.ledger.empty() && !energy_nonincreasing(result_.ledger.back().e_modified, r.e_modified);
    const double before = result_.ledger.empty() ? r.e_modified : result_.ledger.back().e_modified;
    result_.ledger.push_back(r);
    if (opts_.on_record) opts_.on_record(r);
    if (snapshot_due(r.step, r.time)) write_snapshots(r, phi, temp);
    if (ledger_) ledger_->append(r);  // throws in strict mode
    if (rose) {
      ++result_.energy_violations;
      if (c_.strict_energy) {
        throw EnergyLawViolation("modified energy rose from " + format_real(before) + " to " +
                                 format_real(r.e_modified) + " at step " + std::to_string(r.step));
      }
    }
  }

  void finish(const std::vector<unsigned char>& ckpt) {
    if (ledger_) ledger_->flush();
    if (opts_.out_dir) write_bytes(ckpt, *opts_.out_dir / "checkpoint.bin");
  }

 private:
  bool snapshot_due(long n, double t) const {
    if (c_.output.snapshot_every > 0 && n % c_.output.snapshot_every == 0) return true;
    return std::any_of(c_.output.snapshot_times.begin(), c_.output.snapshot_times.end(),
                       [&](double ts) { return std::abs(t - ts) < 0.5 * c_.tau; });
  }

  void write_snapshots(const EnergyRecord& r, const ScalarField& phi, const ScalarField& temp) {
    if (opts_.keep_snapshots) result_.snapshots.emplace_back(r.time, phi, temp);
    if (!opts_.out_dir) return;
    const std::string tag = step_tag(r.step);
    write_snapshot({phi, r.time, "phi"}, *opts_.out_dir / ("phi_" + tag + ".pfc"));
    write_snapshot({temp, r.time, "temp"}, *opts_.out_dir / ("temp_" + tag + ".pfc"));
  }

  const RunConfig& c_;
  const RunOptions& opts_;
  RunResult& result_;
  std::optional<LedgerWriter> ledger_;
};

StepOptions step_options(const RunConfig& c) {
  StepOptions so;
  so.check_identity = c.check_identity;
  so.parallel = !c.deterministic;
  so.cg_tol = c.cg_tol;
  so.cg_maxit = c.cg_maxit;
  return so;
}

long last_step(const RunConfig& c, const RunOptions& opts, long start) {
  return opts.max_steps ? start + *opts.max_steps : c.steps();
}

RunResult simulate_bdf1(const RunConfig& c, const RunOptions& opts) {
  RunResult result;
  RunSink sink(c, opts, result);
  const StepOptions so = step_options(c);
  const SourceTerms sources = file_sources(c);

  bdf1::State s;
  if (opts.resume) {
    s = restore_bdf1(read_bytes(*opts.resume));
  } else {
    auto [phi0, temp0] = initial_fields(c);
    s = bdf1::init_state(phi0, temp0, c.model);
    sink.add(record(s, nullptr, c.model), s.phi, s.temp);
  }
  const long end = last_step(c, opts, s.n);
  while (s.n < end) {
    auto [next, rep] = bdf1::step(s, c.tau, c.model, sources, so);
    s = std::move(next);
    sink.add(record(s, &rep, c.model), s.phi, s.temp);
  }
  sink.finish(checkpoint(s));
  result.phi = s.phi;
  result.temp = s.temp;
  return result;
}

RunResult simulate_bdf2(const RunConfig& c, const RunOptions& opts) {
  RunResult result;
  RunSink sink(c, opts, result);
  const StepOptions so = step_options(c);
  const SourceTerms sources = file_sources(c);

  bdf2::State s;
  if (opts.resume) {
    s = restore_bdf2(read_bytes(*opts.resume));
  } else {
    auto [phi0, temp0] = initial_fields(c);
    bdf2::Bootstrap b = bdf2::bootstrap(phi0, temp0, c.tau, c.model, sources, so);
    const bdf2::State s0 = bdf2::initial_state(b.level0);
    sink.add(record(s0, nullptr, c.model), s0.phi_n, s0.temp_n);
    s = std::move(b.state);
    sink.add(record(s, &b.report, c.model), s.phi_n, s.temp_n);
  }
  const long end = last_step(c, opts, opts.resume ? s.n : 0);
  while (s.n < end) {
    auto [next, rep] = bdf2::step(s, c.tau, c.model, sources, so);
    s = std::move(next);
    sink.add(record(s, &rep, c.model), s.phi_n, s.temp_n);
  }
  sink.finish(checkpoint(s));
  result.phi = s.phi_n;
  result.temp = s.temp_n;
  return result;
}

// Prefixes the message of a run failure, keeping the exception category.
template <class F>
auto annotate(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const EnergyLawViolation& e) {
    throw EnergyLawViolation(what + ": " + e.what());
  } catch (const SolverError& e) {
    throw SolverError(what + ": " + e.what(), e.residual());
  } catch (const IoError& e) {
    throw IoError(what + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string tau_tag(double tau) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "tau_%g", tau);
  return buf;
}

}  // namespace

RunResult simulate(const RunConfig& c, const RunOptions& opts) {
  c.validate();
  if (opts.max_steps && *opts.max_steps < 0) throw std::invalid_argument("simulate: negative step count");
  return c.scheme == Scheme::bdf1 ? simulate_bdf1(c, opts) : simulate_bdf2(c, opts);
}

double estimate_order(const std::vector<double>& errors, const std::vector<double>& taus) {
  if (errors.size() != taus.size()) throw std::invalid_argument("estimate_order: errors and taus differ in length");
  if (errors.size() < 2) throw std::invalid_argument("estimate_order: need at least two points");
  double sx = 0, sy = 0;
  const double n = static_cast<double>(errors.size());
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!(errors[k] > 0.0) || !(taus[k] > 0.0)) throw std::invalid_argument("estimate_order: values must be positive");
    sx += std::log(taus[k]);
    sy += std::log(errors[k]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double dx = std::log(taus[k]) - mx;
    sxy += dx * (std::log(errors[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("estimate_order: all taus are equal");
  return sxy / sxx;
}

bool richardson_consistent(const std::vector<double>& errors, const std::vector<double>& taus, double factor) {
  if (errors.size() < 3 || errors.size() != taus.size()) return false;
  std::vector<std::size_t> order(taus.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return taus[a] > taus[b]; });
  const std::size_t a = order[0], b = order[1], m = order.back();
  const double p = std::log(errors[a] / errors[b]) / std::log(taus[a] / taus[b]);
  const double predicted = errors[b] * std::pow(taus[m] / taus[b], p);
  const double ratio = errors[m] / predicted;
  return ratio <= factor && ratio >= 1.0 / factor;
}

bool ConvergenceReport::richardson_ok() const {
  return richardson_consistent(error_phi, taus) && richardson_consistent(error_temp, taus);
}

double l2_distance(const ScalarField& a, const ScalarField& b) { return std::sqrt(norm_sq(a - b)); }

ConvergenceReport run_accuracy(const RunConfig& base, const std::vector<double>& ladder, double reference_tau,
                               const std::optional<fs::path>& out_dir) {
  if (ladder.size() < 2) throw ConfigError("accuracy ladder needs at least two time steps");
  if (!(reference_tau > 0.0)) throw ConfigError("reference time step must be positive");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (ladder[k] < 10.0 * reference_tau * (1.0 - 1e-12)) {
      throw ConfigError("ladder tau " + format_real(ladder[k]) + " is below 10x the reference tau " +
                        format_real(reference_tau));
    }
    if (k > 0 && !(ladder[k] < ladder[k - 1])) throw ConfigError("accuracy ladder must be strictly decreasing");
  }
  auto steps_for = [&](double tau) {
    const double n = base.t_end / tau;
    if (std::abs(n - std::round(n)) > 1e-6 * n) {
      throw ConfigError("t_end " + format_real(base.t_end) + " is not a multiple of tau " + format_real(tau));
    }
    return std::lround(n);
  };

  auto run_one = [&](double tau, const std::string& tag) {
    RunConfig c = base;
    c.tau = tau;
    RunOptions o;
    o.max_steps = steps_for(tau);
    if (out_dir) o.out_dir = *out_dir / tag;
    return annotate("run with tau = " + format_real(tau), [&] { return simulate(c, o); });
  };

  ConvergenceReport rep;
  rep.reference_tau = reference_tau;
  rep.time = base.t_end;
  const RunResult ref = run_one(reference_tau, "reference");
  rep.min_a1 = ref.min_a1();
  for (double tau : ladder) {
    const RunResult r = run_one(tau, tau_tag(tau));
    rep.taus.push_back(tau);
    rep.error_phi.push_back(l2_distance(r.phi, ref.phi));
    rep.error_temp.push_back(l2_distance(r.temp, ref.temp));
    rep.min_a1 = std::min(rep.min_a1, r.min_a1());
  }
  rep.slope_phi = estimate_order(rep.error_phi, rep.taus);
  rep.slope_temp = estimate_order(rep.error_temp, rep.taus);

  if (out_dir) {
    std::ofstream out(*out_dir / "convergence.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + (*out_dir / "convergence.csv").string());
    out << "tau,error_phi,error_temp\n";
    for (std::size_t k = 0; k < rep.taus.size(); ++k) {
      out << format_real(rep.taus[k]) << ',' << format_real(rep.error_phi[k]) << ','
          << format_real(rep.error_temp[k]) << '\n';
    }
    out << "# slope_phi," << format_real(rep.slope_phi) << "\n# slope_temp," << format_real(rep.slope_temp) << '\n';
  }
  return rep;
}

std::string StabilizerSet::label() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "s1_%g_s2_%g_s3_%g_s4_%g", s1, s2, s3, s4);
  return buf;
}

std::vector<StabilizerSet> default_stabilizer_sets() {
  return {{0.0, 0.0, 0.0, 0.0}, {0.1, 4.0, 0.0, 0.0}, {0.0, 0.0, 5.0, 5.0}, {0.1, 4.0, 5.0, 5.0}};
}

std::vector<StabilityRun> run_stability(const RunConfig& base, const std::vector<double>& taus,
                                        const std::vector<StabilizerSet>& sets, long steps,
                                        const std::optional<fs::path>& out_dir) {
  if (steps < 1) throw ConfigError("stability sweep needs at least one step per run");
  std::vector<StabilityRun> runs;
  for (const StabilizerSet& set : sets) {
    for (double tau : taus) {
      RunConfig c = base;
      c.tau = tau;
      c.t_end = tau * static_cast<double>(steps);
      c.model.s1 = set.s1;
      c.model.s2 = set.s2;
      c.model.s3 = set.s3;
      c.model.s4 = set.s4;
      RunOptions o;
      o.max_steps = steps;
      if (out_dir) o.out_dir = *out_dir / set.label() / tau_tag(tau);
      const RunResult r =
          annotate("run with tau = " + format_real(tau) + ", " + set.label(), [&] { return simulate(c, o); });
      StabilityRun s;
      s.tau = tau;
      s.set = set;
      s.steps = steps;
      s.max_xi_deviation = r.max_xi_deviation();
      s.min_a1 = r.min_a1();
      s.max_identity_residual = r.max_identity_residual();
      s.energy_monotone = r.energy_monotone();
      runs.push_back(s);
    }
  }
  if (out_dir) {
    std::ofstream out(*out_dir / "stability.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + (*out_dir / "stability.csv").string());
    out << "s1,s2,s3,s4,tau,steps,max_xi_deviation,min_a1,max_identity_residual,energy_monotone\n";
    for (const StabilityRun& s : runs) {
      out << format_real(s.set.s1) << ',' << format_real(s.set.s2) << ',' << format_real(s.set.s3) << ','
          << format_real(s.set.s4) << ',' << format_real(s.tau) << ',' << s.steps << ','
          << format_real(s.max_xi_deviation) << ',' << format_real(s.min_a1) << ','
          << format_real(s.max_identity_residual) << ',' << (s.energy_monotone ? 1 : 0) << '\n';
    }
  }
  return runs;
}

const std::map<double, std::vector<double>>& dendrite_caption_times() {
  static const std::map<double, std::vector<double>> times = {
      {0.6, {0.0, 3.0, 6.0, 9.0}},
      {0.8, {3.0, 6.0, 9.0, 11.0}},
      {1.0, {6.0, 9.0, 11.0, 14.0}},
      {1.2, {9.0, 11.0, 14.0, 17.0}},
  };
  return times;
}

double DendriteRun::area_at(double t) const {
  const auto& rows = result.ledger;
  if (rows.empty()) throw std::out_of_range("area_at: empty ledger");
  const auto best = std::min_element(rows.begin(), rows.end(), [&](const EnergyRecord& a, const EnergyRecord& b) {
    return std::abs(a.time - t) < std::abs(b.time - t);
  });
  return best->area;
}

std::vector<DendriteRun> run_dendrite(const RunConfig& base, const std::vector<double>& latents,
                                      const DendriteOptions& opts) {
  std::vector<DendriteRun> runs;
  for (double latent : latents) {
    std::vector<double> times;
    if (opts.times) {
      times = *opts.times;
    } else {
      const auto& table = dendrite_caption_times();
      const auto hit = std::find_if(table.begin(), table.end(),
                                    [&](const auto& kv) { return std::abs(kv.first - latent) < 1e-9; });
      if (hit != table.end()) {
        times = hit->second;
      } else if (!base.output.snapshot_times.empty()) {
        times = base.output.snapshot_times;
      } else {
        throw ConfigError("no snapshot times known for latent = " + format_real(latent) +
                          "; list them in output.snapshot_times");
      }
    }
    const double t_final = opts.t_end.value_or(*std::max_element(times.begin(), times.end()));
    std::erase_if(times, [&](double t) { return t > t_final + 0.5 * base.tau; });

    RunConfig c = base;
    c.model.latent = latent;
    c.t_end = t_final;
    c.output.snapshot_times = times;
    RunOptions o;
    o.keep_snapshots = true;
    if (opts.out_dir) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "K_%g", latent);
      o.out_dir = *opts.out_dir / buf;
    }
    DendriteRun run;
    run.latent = latent;
    run.times = times;
    run.result = annotate("dendrite run with latent = " + format_real(latent), [&] { return simulate(c, o); });
    run.branches = analyze_branches(run.result.phi, c.initial.x0, c.initial.y0);
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace dendrite
