#include "nlsp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "json.hpp"
#include "nlsp/checkpoint.hpp"
#include "nlsp/report.hpp"

namespace nlsp {

using Json = nlohmann::json;

namespace {

struct Context {
  const RunConfig& config;
  OutputDir out;
  RunOutcome outcome;
  Json extra = Json::object();
};

void write_summary(Context& ctx) {
  Json doc;
  doc["scenario"] = scenario_name(ctx.config.scenario);
  doc["status"] = ctx.outcome.status;
  doc["exit_code"] = ctx.outcome.exit_code;
  doc["config_hash"] = ctx.config.hash;
  doc["seed"] = ctx.config.seed;
  Json metrics = Json::object();
  for (const auto& [k, v] : ctx.outcome.metrics) {
    if (std::isfinite(v)) metrics[k] = v;
    else metrics[k] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  }
  doc["metrics"] = metrics;
  if (!ctx.outcome.error.empty()) doc["error"] = ctx.outcome.error;
  for (const auto& [k, v] : ctx.extra.items()) doc[k] = v;
  std::vector<std::string> files = ctx.out.written();
  files.push_back("summary.json");
  doc["files"] = files;
  ctx.out.write("summary.json", doc.dump(2) + "\n");
  ctx.outcome.files = ctx.out.written();
}

std::vector<std::pair<double, double>> norm_series(const TrajectoryRecord& r, bool perp) {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : r.samples) out.emplace_back(s.t, perp ? s.l2_perp : s.l2_norm);
  return out;
}

void write_trajectory(Context& ctx, const TrajectoryRecord& record, const std::string& title) {
  ctx.out.write("trajectory.csv", trajectory_csv(record));
  std::vector<PlotSeries> series{{"||u||", norm_series(record, false)}};
  if (ctx.config.dim == 2) series.push_back({"||u_perp||", norm_series(record, true)});
  ctx.out.write("decay.svg", decay_svg(series, title));
}

// Exponential fit over the last 80% of a completed trajectory.
void add_decay_fit(RunOutcome& outcome, const TrajectoryRecord& record) {
  std::vector<std::pair<double, double>> tail;
  const auto& s = record.samples;
  if (s.empty()) return;
  const double t0 = s.front().t + 0.2 * (s.back().t - s.front().t);
  for (const auto& x : s)
    if (x.t >= t0 && x.l2_norm > 0.0) tail.emplace_back(x.t, x.l2_norm);
  if (tail.size() < 5) return;
  try {
    const DecayFit fit = decay_fit(tail);
    outcome.metrics["decay_rate"] = fit.rate;
    outcome.metrics["decay_r_squared"] = fit.r_squared;
  } catch (const std::exception&) {
  }
}

IntegrationResult integrate_with_checkpoints(Context& ctx, const SpectralField& u0, const SolverConfig& solver,
                                             double t_start) {
  IntegrateOptions opts;
  opts.sample_every = ctx.config.sample_every;
  opts.t_start = t_start;
  const std::int64_t every = ctx.config.checkpoint_every;
  if (every > 0) {
    opts.on_step = [&](std::int64_t step, double t, const SpectralField& u) {
      if (step % every != 0) return;
      char name[48];
      std::snprintf(name, sizeof name, "checkpoint_%09lld.nlsp", static_cast<long long>(step));
      try {
        save_checkpoint(u, {solver.nu, solver.p, t}, ctx.out.path(name));
      } catch (const CheckpointError& e) {
        ctx.out.fail(name, e.what());
      }
      ctx.out.record(name);
    };
  }
  return integrate(u0, solver, opts);
}

void finish_integration(Context& ctx, const IntegrationResult& r, double t_start) {
  RunOutcome& o = ctx.outcome;
  o.status = r.status.label();
  o.exit_code = r.status.kind == EvolutionStatus::Kind::StepCollapse ? 3 : 0;
  o.metrics["t_start"] = t_start;
  o.metrics["t_final"] = r.status.t;
  o.metrics["final_norm"] = r.status.norm;
  o.metrics["steps"] = static_cast<double>(r.steps);
  if (!r.trajectory.samples.empty()) {
    o.metrics["initial_norm"] = r.trajectory.samples.front().l2_norm;
    o.metrics["initial_blowup_energy"] = r.trajectory.samples.front().blowup_energy;
    o.metrics["energy_residual"] = r.trajectory.samples.back().energy_residual;
  }
  if (r.status.kind == EvolutionStatus::Kind::Completed) add_decay_fit(o, r.trajectory);
  try {
    save_checkpoint(r.final_state, {ctx.config.solver.nu, ctx.config.solver.p, r.status.t}, ctx.out.path("final.nlsp"));
  } catch (const CheckpointError& e) {
    ctx.out.fail("final.nlsp", e.what());
  }
  ctx.out.record("final.nlsp");
}

void run_simulate(Context& ctx) {
  const SpectralField u0 = make_initial_data(ctx.config);
  const IntegrationResult r = integrate_with_checkpoints(ctx, u0, ctx.config.solver, 0.0);
  write_trajectory(ctx, r.trajectory, "simulate: " + ctx.config.solver.flow.name() + " flow");
  finish_integration(ctx, r, 0.0);
}

void run_dissipation(Context& ctx) {
  const RunConfig& c = ctx.config;
  DissipationOptions opts;
  opts.tol = c.dissipation.tol;
  opts.check_truncation = c.dissipation.check_truncation;
  opts.curve_points = c.dissipation.curve_points;
  const DissipationTimeResult r = dissipation_time(c.solver.flow, c.solver.nu, c.dissipation.truncation, opts);
  Table curve{{"t", "norm"}, {}};
  for (const auto& [t, n] : r.norm_curve) curve.rows.push_back({format_double(t), format_double(n)});
  ctx.out.write("norm_curve.csv", curve.csv());
  ctx.out.write("decay.svg", decay_svg({{"||S(t)||", r.norm_curve}}, "solution operator norm"));
  auto& m = ctx.outcome.metrics;
  m["tau_star"] = r.tau_star;
  m["truncation"] = r.truncation;
  m["bisection_tol"] = r.bisection_tol;
  m["norm_at_tau"] = r.norm_at_tau;
  if (r.truncation_checked) {
    m["tau_star_refined"] = r.tau_star_refined;
    m["truncation_converged"] = r.truncation_converged ? 1.0 : 0.0;
  }
  ctx.outcome.status = "Completed";
}

void run_blowup_scan(Context& ctx) {
  const RunConfig& c = ctx.config;
  const SpectralField shape = make_initial_data(c);
  double a_star = NAN;
  if (c.solver.p > 1.0) {
    try {
      a_star = blowup_threshold_amplitude(shape, c.solver.p);
    } catch (const std::exception&) {
    }
  }
  if (c.scan.relative && !std::isfinite(a_star))
    throw std::runtime_error("relative amplitudes need a finite sign-flip amplitude A* (p > 1, nonzero datum)");
  Table table{{"multiplier", "amplitude", "blowup_energy", "status", "t", "norm"}, {}};
  int blowups = 0;
  for (double a : c.scan.amplitudes) {
    const double factor = c.scan.relative ? a * a_star : a;
    const SpectralField u0 = factor * shape;
    const IntegrationResult r = integrate(u0, c.solver, {c.sample_every, 0.0, {}});
    if (r.status.kind == EvolutionStatus::Kind::BlowUp) ++blowups;
    table.rows.push_back({format_double(a), format_double(factor), format_double(blowup_energy(u0, c.solver.p)),
                          r.status.label(), format_double(r.status.t), format_double(r.status.norm)});
  }
  ctx.out.write("scan.csv", table.csv());
  ctx.outcome.metrics["a_star"] = a_star;
  ctx.outcome.metrics["blowup_rows"] = blowups;
  ctx.outcome.metrics["rows"] = static_cast<double>(c.scan.amplitudes.size());
  ctx.outcome.status = "Completed";
}

EnhancedDissipationOptions enhanced_options(const RunConfig& c) {
  EnhancedDissipationOptions o;
  o.k2_max = c.enhanced.k2_max;
  o.k1_max = c.enhanced.k1_max;
  o.seed = c.seed;
  o.min_decades = c.enhanced.min_decades;
  return o;
}

void run_enhanced(Context& ctx) {
  const RunConfig& c = ctx.config;
  const ShearFlow& shear = std::get<ShearFlow>(c.solver.flow.variant);
  const EnhancedDissipationOptions opts = enhanced_options(c);
  Table table{{"nu", "rate", "horizon", "r_squared"}, {}};
  std::vector<double> x, y;
  for (double nu : c.enhanced.nus) {
    const RateSample r = enhanced_dissipation_rate(shear, nu, opts);
    table.rows.push_back({format_double(nu), format_double(r.rate), format_double(r.horizon),
                          format_double(r.r_squared)});
    x.push_back(std::log(nu));
    y.push_back(std::log(r.rate));
  }
  ctx.out.write("rates.csv", table.csv());
  auto& m = ctx.outcome.metrics;
  if (x.size() >= 2) {
    const auto [a, b, r2] = linear_regression(x, y);
    const auto [lo, hi] = std::minmax_element(c.enhanced.nus.begin(), c.enhanced.nus.end());
    m["exponent"] = b;
    m["prefactor"] = std::exp(a);
    m["r_squared"] = r2;
    m["decades"] = std::log10(*hi / *lo);
    m["fit_meets_span"] = (x.size() >= 4 && std::log10(*hi / *lo) >= opts.min_decades - 1e-12) ? 1.0 : 0.0;
    m["critical_order"] = shear.critical_order;
    m["expected_exponent"] = 2.0 / (2.0 + shear.critical_order);
  }
  ctx.outcome.status = "Completed";
}

void run_shear_suppression(Context& ctx) {
  const RunConfig& c = ctx.config;
  const ShearFlow& shear = std::get<ShearFlow>(c.solver.flow.variant);
  const double p = c.solver.p;
  const double nu = c.solver.nu;
  auto& m = ctx.outcome.metrics;

  const double lambda = enhanced_dissipation_rate(shear, nu, enhanced_options(c)).rate;
  const double c_p = fit_gagliardo_nirenberg_constant(p, c.shear.gn_samples, c.seed);
  const double threshold = smallness_threshold(p, c_p);

  const Grid grid(2, c.points);
  const ShearParts parts = shear_decompose(make_initial_data(c));
  SpectralField perp = parts.perp_part;
  const double perp_raw = l2_norm(perp);
  if (c.shear.perp_norm > 0.0 && perp_raw == 0.0)
    throw std::runtime_error("initial datum has no x1-dependent part to scale to perp_norm");
  if (perp_raw > 0.0) perp *= c.shear.perp_norm / perp_raw;
  SpectralField mean = parts.mean_part;
  if (l2_norm(mean) == 0.0) {
    mean[{1, 0}] = Complex(0.0, -0.5);
    mean[{-1, 0}] = Complex(0.0, 0.5);
  }
  mean *= c.shear.mean_fraction * threshold / l2_norm(mean);
  SpectralField u0 = embed_mean_part(mean, grid) + perp;
  u0.set_mean_zero(true);

  SolverConfig solver = c.solver;
  solver.form = EquationForm::Shear;
  solver.t_end = c.shear.horizon_rates / lambda;
  const IntegrationResult r = integrate_with_checkpoints(ctx, u0, solver, 0.0);
  write_trajectory(ctx, r.trajectory, "shear suppression");
  finish_integration(ctx, r, 0.0);

  const BootstrapReport b = bootstrap_monitor(r.trajectory, lambda);
  const double mean0 = l2_norm(mean), perp0 = l2_norm(perp);
  const double bound = mean_part_bound(p, c_p, nu, lambda, mean0, perp0);
  double worst = 0.0;
  for (const auto& s : r.trajectory.samples) worst = std::max(worst, s.l2_mean_x1 / bound);
  m["lambda_nu"] = lambda;
  m["c_p"] = c_p;
  m["smallness_threshold"] = threshold;
  m["mean0"] = mean0;
  m["perp0"] = perp0;
  m["t_end"] = solver.t_end;
  m["coeff_decay"] = b.coeff_decay;
  m["coeff_gradient"] = b.coeff_gradient;
  m["mean_bound"] = bound;
  m["mean_bound_ratio"] = worst;
  const bool completed = r.status.kind == EvolutionStatus::Kind::Completed;
  m["in_regime"] = (completed && b.coeff_decay <= 20.0 && b.coeff_gradient <= 10.0 && worst <= 2.0) ? 1.0 : 0.0;
}

RunOutcome execute(const RunConfig& config, const std::function<void(Context&)>& body) {
  Context ctx{config, OutputDir(config.output_dir), {}};
  try {
    body(ctx);
  } catch (const OutputError&) {
    throw;
  } catch (const std::exception& e) {
    ctx.outcome.exit_code = 3;
    ctx.outcome.status = "Failed";
    ctx.outcome.error = e.what();
  }
  write_summary(ctx);
  return ctx.outcome;
}

}  // namespace

SpectralField make_initial_data(const RunConfig& config) {
  const Grid grid(config.dim, config.points);
  const InitialDataSpec& spec = config.initial;
  switch (spec.kind) {
    case InitialDataSpec::Kind::SingleMode: {
      SpectralField u(grid);
      const Wavevector k = spec.k;
      if (k[0] == 0 && k[1] == 0) {
        u[{0, 0}] = spec.amplitude;
        return u;
      }
      if ((config.dim == 1 && k[1] != 0) || !grid.contains(k) || !grid.contains({-k[0], -k[1]}))
        throw std::invalid_argument("single_mode wavevector outside the grid");
      u[k] = Complex(0.0, -0.5 * spec.amplitude);
      u[{-k[0], -k[1]}] = Complex(0.0, 0.5 * spec.amplitude);
      u.set_mean_zero(true);
      return u;
    }
    case InitialDataSpec::Kind::RandomBand:
      return random_band_field(grid, spec.k_max, spec.amplitude, spec.seed);
    case InitialDataSpec::Kind::File: {
      LoadedCheckpoint c = load_checkpoint(spec.path);
      if (!(c.field.grid() == grid))
        throw std::invalid_argument("initial data file grid does not match the configured grid");
      return c.field;
    }
  }
  throw std::logic_error("unhandled initial data kind");
}

RunOutcome run(const RunConfig& config) {
  switch (config.scenario) {
    case ScenarioKind::Simulate: return execute(config, run_simulate);
    case ScenarioKind::DissipationTime: return execute(config, run_dissipation);
    case ScenarioKind::BlowupScan: return execute(config, run_blowup_scan);
    case ScenarioKind::EnhancedDissipationSweep: return execute(config, run_enhanced);
    case ScenarioKind::ShearSuppression: return execute(config, run_shear_suppression);
  }
  throw std::logic_error("unhandled scenario");
}

RunOutcome resume(const RunConfig& config, const std::filesystem::path& checkpoint) {
  if (config.scenario != ScenarioKind::Simulate) throw ConfigError({"resume supports the simulate scenario only"});
  LoadedCheckpoint c = load_checkpoint(checkpoint);
  std::vector<std::string> errors;
  if (!(c.field.grid() == Grid(config.dim, config.points))) errors.push_back("checkpoint grid differs from config grid");
  if (c.meta.nu != config.solver.nu) errors.push_back("checkpoint nu differs from solver.nu");
  if (c.meta.p != config.solver.p) errors.push_back("checkpoint p differs from solver.p");
  if (!(c.meta.t <= config.solver.t_end)) errors.push_back("checkpoint time is beyond solver.t_end");
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return execute(config, [&](Context& ctx) {
    const IntegrationResult r = integrate_with_checkpoints(ctx, c.field, config.solver, c.meta.t);
    write_trajectory(ctx, r.trajectory, "resume from t = " + format_double(c.meta.t));
    finish_integration(ctx, r, c.meta.t);
    ctx.extra["resumed_from"] = checkpoint.string();
  });
}

std::vector<SweepRow> sweep(const std::vector<RunConfig>& configs, int parallelism) {
  std::vector<SweepRow> rows(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      SweepRow& row = rows[i];
      row.index = i;
      row.scenario = scenario_name(configs[i].scenario);
      try {
        RunOutcome o = run(configs[i]);
        row.status = o.status;
        row.metrics = std::move(o.metrics);
        row.error = std::move(o.error);
      } catch (const std::exception& e) {
        row.status = "Failed";
        row.error = e.what();
      }
    }
  };
  const int threads = std::clamp(parallelism, 1, static_cast<int>(std::max<std::size_t>(configs.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::set<std::string> keys;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.metrics) keys.insert(k);
  Table table{{"index", "scenario", "status"}, {}};
  table.columns.insert(table.columns.end(), keys.begin(), keys.end());
  table.columns.push_back("error");
  for (const auto& r : rows) {
    std::vector<std::string> line{std::to_string(r.index), r.scenario, r.status};
    for (const auto& k : keys) {
      const auto it = r.metrics.find(k);
      line.push_back(it == r.metrics.end() ? "" : format_double(it->second));
    }
    line.push_back(r.error);
    table.rows.push_back(std::move(line));
  }
  return table.csv();
}

}  // namespace nlsp
