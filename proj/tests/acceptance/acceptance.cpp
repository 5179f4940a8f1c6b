// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nlsp/dissipation.hpp"
#include "nlsp/evolution.hpp"
#include "nlsp/runner.hpp"

using namespace nlsp;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> body;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

SpectralField sine_x1(const Grid& g, double amplitude) {
  SpectralField u(g);
  u[{1, 0}] = Complex(0.0, -0.5 * amplitude);
  u[{-1, 0}] = Complex(0.0, 0.5 * amplitude);
  u.set_mean_zero(true);
  return u;
}

double sine_threshold(const Grid& g, double p) { return blowup_threshold_amplitude(sine_x1(g, 1.0), p); }

Verdict spectral_exactness() {
  double worst_heat = 0.0;
  const Grid g(2, 32);
  for (const Wavevector k : {Wavevector{1, 0}, Wavevector{2, 3}, Wavevector{-5, 4}}) {
    SpectralField u(g);
    u[k] = 1.0;
    u[{-k[0], -k[1]}] = 1.0;
    const double lambda = kFourPiSq * (k[0] * k[0] + k[1] * k[1]);
    for (int i = 0; i <= 100; ++i) {
      const double t = i / 100.0;
      const double exact = std::exp(-lambda * t);
      const double got = heat_semigroup(u, t)[k].real();
      worst_heat = std::max(worst_heat, std::abs(got - exact) / exact);
    }
  }
  double worst_trip = 0.0;
  for (const Grid& grid : {Grid(1, 64), Grid(2, 64)}) {
    std::vector<double> x(grid.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * i) + 0.1 * std::cos(1.3 * i * i);
    const std::vector<double> back = inverse_transform(forward_transform(grid, x));
    for (std::size_t i = 0; i < x.size(); ++i) worst_trip = std::max(worst_trip, std::abs(back[i] - x[i]));
  }
  return {worst_heat <= 1e-10 && worst_trip <= 1e-12,
          fmt("heat rel err %.2e (tol 1e-10), round trip %.2e (tol 1e-12)", worst_heat, worst_trip)};
}

Verdict equilibrium_invariance() {
  const Grid g(2, 16);
  const std::vector<FlowSpec> flows{FlowSpec{},
                                    ShearFlow::sine(),
                                    ShearFlow::sine_cubed(),
                                    make_cellular(5.0, 0.5),
                                    make_rescaled(make_cellular(1.0, 1.0), 3.0)};
  double worst = 0.0;
  std::string names;
  for (const FlowSpec& flow : flows) {
    SolverConfig cfg;
    cfg.flow = flow;
    cfg.enforce_mean_zero = false;
    cfg.dt = 1e-4;
    cfg.t_end = 1.0;  // 10^4 steps
    SpectralField u0(g);
    u0[{0, 0}] = 0.7;
    const IntegrationResult r = integrate(u0, cfg, {10000, 0.0, {}});
    double dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      dev = std::max(dev, std::abs(r.final_state.coeffs()[i] - u0.coeffs()[i]));
    if (r.steps != 10000) dev = INFINITY;
    worst = std::max(worst, dev);
    names += flow.name() + " ";
  }
  return {worst <= 1e-8, fmt("max coefficient drift %.2e over 1e4 steps (tol 1e-8); flows: ", worst) + names};
}

Verdict energy_identity() {
  const Grid g(2, 64);
  const SpectralField u0 = random_band_field(g, 4, 1.0, 11);
  SolverConfig cfg;
  cfg.p = 1.5;
  cfg.scheme = Scheme::Etdrk2;
  cfg.t_end = 0.05;
  double res[2];
  const double dts[2] = {1e-3, 5e-4};
  for (int i = 0; i < 2; ++i) {
    cfg.dt = dts[i];
    const IntegrationResult r = integrate(u0, cfg, {1000000, 0.0, {}});
    res[i] = std::abs(r.trajectory.samples.back().energy_residual);
  }
  const double ratio = res[0] / res[1];
  return {ratio >= 3.5 && ratio <= 4.5,
          fmt("residual %.3e at dt=1e-3, %.3e at dt=5e-4, ratio %.3f (need [3.5, 4.5])", res[0], res[1], ratio)};
}

Verdict picard_contraction() {
  const Grid g(2, 16);
  SolverConfig cfg;
  cfg.flow = make_cellular(1.0, 1.0);
  cfg.dt = 1e-3;
  const SpectralField u0 = random_band_field(g, 3, 0.1, 21);
  const double constant = fit_contraction_constant(u0, cfg, 0.05);
  const double horizon = picard_horizon(u0, cfg, constant);
  cfg.dt = horizon / 100.0;
  const PicardReport r = picard_iterate(u0, cfg, horizon, 12);
  double worst_ratio = 0.0;
  for (double q : r.contraction_ratios) worst_ratio = std::max(worst_ratio, q);
  cfg.t_end = horizon;
  const IntegrationResult direct = integrate(u0, cfg);
  const double diff = l2_norm(r.limit.back().u - direct.final_state);
  const bool pass = r.converged && !r.contraction_ratios.empty() && worst_ratio <= 0.5 && diff <= 10.0 * cfg.dt;
  return {pass, fmt("fitted constant %.3f, T = %.4g, %zu ratios, max %.3g (need <= 0.5), |limit - integrate| = %.2e "
                    "(need <= 10 dt = %.2e)",
                    constant, horizon, r.contraction_ratios.size(), worst_ratio, diff, 10.0 * cfg.dt)};
}

Verdict blowup_dichotomy() {
  const Grid g(2, 32);
  const double p = 1.5;
  const double a_star = sine_threshold(g, p);
  SolverConfig cfg;
  cfg.p = p;
  cfg.t_end = 5.0;
  cfg.dt = 1e-4;
  std::string detail = fmt("A* = %.2f;", a_star);
  bool pass = true;
  for (double m : {1.5, 2.0, 4.0, 8.0}) {
    const IntegrationResult r = integrate(sine_x1(g, m * a_star), cfg, {1000000, 0.0, {}});
    const bool blew = r.status.kind == EvolutionStatus::Kind::BlowUp && r.status.t < 5.0;
    pass = pass && blew;
    detail += fmt(" %.1fA*: %s t=%.3g |u|=%.3g;", m, r.status.label().c_str(), r.status.t, r.status.norm);
  }
  const SpectralField small = sine_x1(g, 0.1);
  const IntegrationResult r = integrate(small, cfg, {1000000, 0.0, {}});
  const bool decays = r.status.kind == EvolutionStatus::Kind::Completed && r.status.norm < l2_norm(small);
  pass = pass && decays;
  detail += fmt(" A=0.1: %s |u(5)|=%.3g vs |u0|=%.3g", r.status.label().c_str(), r.status.norm, l2_norm(small));
  return {pass, detail};
}

Verdict cellular_suppression() {
  const Grid g(2, 64);
  const double p = 1.5;
  const double amplitude = 8.0 * sine_threshold(Grid(2, 32), p);
  const SpectralField u0 = sine_x1(g, amplitude);
  SolverConfig cfg;
  cfg.p = p;
  cfg.nu = 1.0;
  cfg.t_end = 0.3;
  cfg.dt = 1e-5;
  const IntegrationResult control = integrate(u0, cfg, {1000, 0.0, {}});
  std::string detail = fmt("u0 = %.0f sin(2 pi x1) (8 A*); no flow: %s at t=%.3g;", amplitude,
                           control.status.label().c_str(), control.status.t);
  if (control.status.kind != EvolutionStatus::Kind::BlowUp) return {false, detail + " datum does not blow up"};
  for (double a : {1.0, 3.0, 10.0, 30.0, 100.0}) {
    cfg.flow = make_cellular(a, 1.0);
    cfg.dt = std::min(1e-5, 0.2 / (g.points_per_axis() * kTwoPi * a));
    const IntegrationResult r = integrate(u0, cfg, {std::max(1, static_cast<int>(cfg.t_end / cfg.dt / 60)), 0.0, {}});
    detail += fmt(" A=%.0f: %s", a, r.status.label().c_str());
    if (r.status.kind != EvolutionStatus::Kind::Completed) continue;
    std::vector<std::pair<double, double>> tail;
    for (const auto& s : r.trajectory.samples)
      if (s.t >= 0.2 * cfg.t_end) tail.emplace_back(s.t, s.l2_norm);
    const DecayFit fit = decay_fit(tail);
    detail += fmt(" rate %.3f R^2 %.5f", fit.rate, fit.r_squared);
    if (fit.r_squared > 0.95 && fit.rate > 0.0)
      return {true, detail + fmt("; A_supp = %.0f (cell scale 1)", a)};
    detail += ";";
  }
  return {false, detail + " no suppressing amplitude found"};
}

Verdict dissipation_time_criterion() {
  const double heat = dissipation_time(FlowSpec{}, 1.0, 16).tau_star;
  const double exact = std::log(2.0) / kFourPiSq;
  bool pass = std::abs(heat - exact) <= 1e-4;
  std::string detail = fmt("zero flow tau* = %.8f (exact %.8f);", heat, exact);
  double previous = INFINITY;
  DissipationOptions o;
  o.check_truncation = true;
  for (double a : {0.0, 10.0, 50.0, 200.0}) {
    const DissipationTimeResult r = dissipation_time(make_cellular(a, 1.0), 1.0, 16, o);
    const double gap = std::abs(r.tau_star_refined - r.tau_star) / r.tau_star_refined;
    pass = pass && r.tau_star <= previous && gap < 0.05;
    detail += fmt(" A=%.0f: %.6f (2K %.6f, %.2f%%);", a, r.tau_star, r.tau_star_refined, 100.0 * gap);
    previous = r.tau_star;
  }
  return {pass, detail};
}

Verdict enhanced_dissipation() {
  const std::vector<double> nus{0.05, 0.02, 0.01, 0.005, 0.002};
  EnhancedDissipationOptions o;
  // The prescribed list spans log10(25) = 1.40 decades.
  o.min_decades = 1.0;
  const EnhancedDissipationFit fit = enhanced_dissipation_fit(ShearFlow::sine(), nus, o);
  std::string detail = fmt("slope %.4f (need [0.35, 0.65], target 0.5), R^2 %.5f (need > 0.95); rates:", fit.exponent,
                           fit.r_squared);
  for (const RateSample& r : fit.rates) detail += fmt(" nu=%g:%.4f", r.nu, r.rate);
  return {fit.exponent >= 0.35 && fit.exponent <= 0.65 && fit.r_squared > 0.95, detail};
}

Verdict shear_suppression() {
  const auto root = std::filesystem::temp_directory_path() / "nlsp_acceptance_shear";
  std::filesystem::remove_all(root);
  auto run_at = [&](double nu) {
    const std::string text = R"({"scenario": "shear-suppression", "grid": {"points": 32},
        "solver": {"nu": )" + fmt("%.17g", nu) + R"(, "p": 1.5, "dt": 2e-3},
        "flow": {"type": "shear", "profile": "sine"},
        "initial_data": {"type": "random_band", "k_max": 3, "amplitude": 1, "seed": 5},
        "shear_suppression": {"mean_fraction": 0.1, "perp_norm": 1.0, "gn_samples": 200, "horizon_rates": 50},
        "sample_every": 20, "seed": 11, "output_dir": ")" +
                             (root / fmt("nu_%g", nu)).string() + "\"}";
    return run(parse_config(text));
  };
  double nu0 = 0.0;
  std::string detail = "scan:";
  for (double nu : {0.1, 0.05, 0.02}) {
    const RunOutcome o = run_at(nu);
    const bool ok = o.exit_code == 0 && o.metrics.count("in_regime") && o.metrics.at("in_regime") == 1.0;
    detail += fmt(" nu=%g %s;", nu, ok ? "in regime" : "out");
    if (ok && nu0 == 0.0) nu0 = nu;
    if (!ok) nu0 = 0.0;
  }
  if (nu0 == 0.0) return {false, detail + " no admissible nu0"};
  const double nu = nu0 / 2.0;
  const RunOutcome o = run_at(nu);
  const auto& m = o.metrics;
  if (o.exit_code != 0 || !m.count("in_regime")) return {false, detail + " run at nu0/2 failed: " + o.error};
  detail += fmt(" nu0 = %g, run at nu = %g: %s to t = %.2f (50/lambda, lambda = %.4f), C_p = %.4f, threshold %.3f, "
                "coeff_decay %.3f (<= 20), coeff_gradient %.3f (<= 10), max |<u>|/bound %.3f (<= 2)",
                nu0, nu, o.status.c_str(), m.at("t_final"), m.at("lambda_nu"), m.at("c_p"),
                m.at("smallness_threshold"), m.at("coeff_decay"), m.at("coeff_gradient"), m.at("mean_bound_ratio"));
  return {m.at("in_regime") == 1.0 && o.status == "Completed", detail};
}

Verdict mixing_decay_criterion() {
  const Grid g(2, 32);
  SpectralField u0 = random_band_field(g, 4, 1.0, 13);
  u0 = shear_decompose(u0).perp_part;
  const MixingReport r = mixing_decay(u0, ShearFlow::sine(), 1.0, 50.0, 40);
  return {r.fit.exponent < 0.0 && r.fit.r_squared > 0.9,
          fmt("slope %.4f, R^2 %.5f; gap to -m (m=2): %+.4f, gap to -1/m: %+.4f", r.fit.exponent, r.fit.r_squared,
              r.gap_to_m, r.gap_to_inverse_m)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "spectral exactness", 1, spectral_exactness},
      {2, "equilibrium invariance", 10, equilibrium_invariance},
      {3, "energy identity convergence", 60, energy_identity},
      {4, "Picard contraction", 120, picard_contraction},
      {5, "blow-up dichotomy", 300, blowup_dichotomy},
      {6, "suppression by cellular flow", 900, cellular_suppression},
      {7, "dissipation time", 600, dissipation_time_criterion},
      {8, "enhanced dissipation exponent", 900, enhanced_dissipation},
      {9, "shear suppression regime", 1800, shear_suppression},
      {10, "mixing decay", 300, mixing_decay_criterion},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s [%.1f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
