#include "nlsp/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nlsp {

namespace {

void require_finite(const SpectralField& u, const char* where) {
  if (!u.is_finite()) throw StepCollapseError(std::string("non-finite coefficients in ") + where);
}

std::vector<char> dealias_mask(const Grid& grid, double fraction) {
  const double cutoff = fraction * grid.points_per_axis() / 2.0;
  std::vector<char> keep(grid.size(), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (std::abs(k[0]) > cutoff || std::abs(k[1]) > cutoff) keep[i] = 0;
  }
  return keep;
}

double flow_norm_for_horizon(const SolverConfig& config, const Grid& grid) {
  if (config.flow.is_zero()) return 0.0;
  const double q = 2.0 / (config.p - 1.0);
  return flow_lq_norm(config.flow, grid, q, 0.0);
}

// Time grid of spacing <= dt covering [0, horizon].
std::vector<double> time_grid(double horizon, double dt) {
  const auto n = static_cast<std::int64_t>(std::ceil(horizon / dt - 1e-9));
  const std::int64_t steps = std::max<std::int64_t>(n, 1);
  std::vector<double> t(steps + 1);
  for (std::int64_t i = 0; i <= steps; ++i) t[i] = horizon * static_cast<double>(i) / steps;
  return t;
}

// Free evolution e^{t nu Lap} u0 on the time grid.
std::vector<TimedField> free_evolution(const SpectralField& u0, const Stepper& stepper,
                                       std::span<const double> times) {
  std::vector<TimedField> out;
  out.reserve(times.size());
  for (double t : times) {
    SpectralField u = u0;
    stepper.apply_semigroup(u, t);
    out.push_back({t, std::move(u)});
  }
  return out;
}

// One application of the mild-solution map with trapezoidal Duhamel quadrature:
//   I_{n+1} = E (I_n + h/2 F_n) + h/2 F_{n+1},  E = e^{h nu Lap}.
std::vector<TimedField> mild_map(const SpectralField& u0, const Stepper& stepper,
                                 std::span<const TimedField> iterate) {
  std::vector<TimedField> out;
  out.reserve(iterate.size());
  SpectralField integral(u0.grid());
  integral.set_mean_zero(true);
  SpectralField forcing_prev = stepper.forcing(iterate[0].u, iterate[0].t);
  {
    SpectralField u = u0;
    stepper.apply_semigroup(u, iterate[0].t);
    out.push_back({iterate[0].t, std::move(u)});
  }
  for (std::size_t n = 1; n < iterate.size(); ++n) {
    const double h = iterate[n].t - iterate[n - 1].t;
    SpectralField forcing_next = stepper.forcing(iterate[n].u, iterate[n].t);
    integral += (0.5 * h) * forcing_prev;
    stepper.apply_semigroup(integral, h);
    integral += (0.5 * h) * forcing_next;
    SpectralField u = u0;
    stepper.apply_semigroup(u, iterate[n].t);
    u += integral;
    out.push_back({iterate[n].t, std::move(u)});
    forcing_prev = std::move(forcing_next);
  }
  return out;
}

std::vector<TimedField> difference(std::span<const TimedField> a, std::span<const TimedField> b) {
  std::vector<TimedField> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back({a[i].t, a[i].u - b[i].u});
  return out;
}

}  // namespace

std::string EvolutionStatus::label() const {
  switch (kind) {
    case Kind::Completed: return "Completed";
    case Kind::BlowUp: return "BlowUp";
    case Kind::StepCollapse: return "StepCollapse";
  }
  return "Unknown";
}

void validate(const SolverConfig& config, const Grid& grid) {
  std::vector<std::string> errors;
  const int n = grid.dim();
  const double p_max = 1.0 + 2.0 / n;
  if (!(config.nu > 0.0)) errors.push_back("nu must be > 0");
  if (!(config.p >= 1.0 && config.p < p_max)) {
    std::ostringstream os;
    os << "p = " << config.p << " violates 1 <= p < 1 + 2/N = " << p_max << " for N = " << n;
    errors.push_back(os.str());
  }
  if (!(config.dt > 0.0)) errors.push_back("dt must be > 0");
  if (!(config.t_end >= 0.0)) errors.push_back("t_end must be >= 0");
  if (!(config.dealias_fraction > 0.0 && config.dealias_fraction <= 1.0))
    errors.push_back("dealias_fraction must lie in (0, 1]");
  if (!(config.blowup_threshold > 0.0)) errors.push_back("blowup_threshold must be > 0");
  if (!(config.growth_guard > 1.0)) errors.push_back("growth_guard must be > 1");
  if (config.max_dt_halvings < 0) errors.push_back("max_dt_halvings must be >= 0");
  if (!config.flow.is_zero() && n != 2)
    errors.push_back(config.flow.name() + " flow requires a two-dimensional grid");
  if (errors.empty()) return;
  std::string message = "invalid solver config: ";
  for (std::size_t i = 0; i < errors.size(); ++i) message += (i ? "; " : "") + errors[i];
  throw std::invalid_argument(message);
}

double phi1(double z) {
  if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 1e-2)
    return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0;
  return (std::expm1(z) - z) / (z * z);
}

SpectralField nonlocal_nonlinearity(const SpectralField& u, double p, double dealias_fraction) {
  if (!(p >= 1.0)) throw std::invalid_argument("nonlinearity exponent must be >= 1");
  std::vector<double> x = inverse_transform(u);
  for (double& v : x) v = std::pow(std::abs(v), p);
  SpectralField out = dealias(forward_transform(u.grid(), x), dealias_fraction);
  out.coeffs()[0] = Complex{};
  out.set_mean_zero(true);
  require_finite(out, "nonlocal nonlinearity");
  return out;
}

SpectralField advection_term(const SpectralField& u, const FlowSpec& flow, double t,
                             double dealias_fraction) {
  const Grid& grid = u.grid();
  if (flow.is_zero()) return SpectralField(grid);
  const VelocitySample v = evaluate_flow(flow, grid, t);
  const std::vector<SpectralField> grad = gradient(u);
  std::vector<double> product(grid.size(), 0.0);
  for (int j = 0; j < grid.dim(); ++j) {
    const std::vector<double> g = inverse_transform(grad[j]);
    for (std::size_t i = 0; i < grid.size(); ++i) product[i] += v.components[j][i] * g[i];
  }
  return dealias(forward_transform(grid, product), dealias_fraction);
}

Stepper::Stepper(const Grid& grid, SolverConfig config)
    : grid_(grid), config_(std::move(config)) {
  validate(config_, grid_);
  symbol_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i)
    symbol_[i] = config_.nu * grid_.laplacian_symbol(i);
  keep_ = dealias_mask(grid_, config_.dealias_fraction);
}

const Stepper::Tables& Stepper::tables(double dt) const {
  if (cache_.dt == dt && !cache_.decay.empty()) return cache_;
  const std::size_t n = grid_.size();
  cache_.dt = dt;
  cache_.decay.resize(n);
  cache_.phi1.resize(n);
  cache_.phi2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = -symbol_[i] * dt;
    cache_.decay[i] = std::exp(z);
    cache_.phi1[i] = phi1(z);
    cache_.phi2[i] = phi2(z);
  }
  return cache_;
}

const std::vector<std::vector<double>>& Stepper::velocity(double t) const {
  if (config_.flow.is_steady()) {
    if (steady_velocity_.empty()) steady_velocity_ = evaluate_flow(config_.flow, grid_, 0.0).components;
    return steady_velocity_;
  }
  velocity_scratch_ = evaluate_flow(config_.flow, grid_, t).components;
  return velocity_scratch_;
}

SpectralField Stepper::forcing(const SpectralField& u, double t) const {
  const std::size_t n = grid_.size();
  const double scale = config_.nonlinear_scale();
  std::vector<double> f(n, 0.0);
  if (scale != 0.0) {
    const std::vector<double> x = inverse_transform(u);
    for (std::size_t i = 0; i < n; ++i) f[i] = scale * std::pow(std::abs(x[i]), config_.p);
  }
  if (!config_.flow.is_zero()) {
    const auto& v = velocity(t);
    const std::vector<SpectralField> grad = gradient(u);
    for (int j = 0; j < grid_.dim(); ++j) {
      const std::vector<double> g = inverse_transform(grad[j]);
      for (std::size_t i = 0; i < n; ++i) f[i] -= v[j][i] * g[i];
    }
  }
  SpectralField out = forward_transform(grid_, f);
  auto c = out.coeffs();
  for (std::size_t i = 0; i < n; ++i)
    if (!keep_[i]) c[i] = Complex{};
  c[0] = Complex{};
  out.set_mean_zero(true);
  require_finite(out, "forcing");
  return out;
}

void Stepper::apply_semigroup(SpectralField& u, double s) const {
  auto c = u.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::exp(-symbol_[i] * s);
}

SpectralField Stepper::step(const SpectralField& u, double t, double dt) const {
  require_finite(u, "step input");
  const Tables& tab = tables(dt);
  const std::size_t n = grid_.size();
  const SpectralField fu = forcing(u, t);
  SpectralField out = u;
  {
    auto o = out.coeffs();
    auto f = fu.coeffs();
    for (std::size_t i = 0; i < n; ++i) o[i] = tab.decay[i] * o[i] + dt * tab.phi1[i] * f[i];
  }
  if (config_.scheme == Scheme::Etdrk2) {
    const SpectralField fa = forcing(out, t + dt);
    auto o = out.coeffs();
    auto f0 = fu.coeffs();
    auto f1 = fa.coeffs();
    for (std::size_t i = 0; i < n; ++i) o[i] += dt * tab.phi2[i] * (f1[i] - f0[i]);
  }
  if (config_.enforce_mean_zero) {
    out.coeffs()[0] = Complex{};
    out.set_mean_zero(true);
  } else {
    out.set_mean_zero(u.is_mean_zero());
  }
  require_finite(out, "step output");
  return out;
}

SpectralField step(const SpectralField& u, double t, const SolverConfig& config) {
  return Stepper(u.grid(), config).step(u, t, config.dt);
}

IntegrationResult integrate(const SpectralField& u0, const SolverConfig& config,
                            const IntegrateOptions& options) {
  const Grid& grid = u0.grid();
  const Stepper stepper(grid, config);
  if (options.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  require_finite(u0, "initial data");

  SpectralField u = config.enforce_mean_zero ? project_mean_zero(u0) : u0;
  const double norm0 = l2_norm(u);
  const double threshold = config.blowup_threshold * (1.0 + norm0);
  const double c = config.nonlinear_scale();

  // Running energy budget: 2 nu int ||grad u||^2 and 2 c int (int |u|^p u - mean int |u|^p).
  auto budget = [&](const SpectralField& w) {
    const double g = h1_seminorm(w);
    double source = 0.0;
    if (c != 0.0) source = pairing_integral(w, config.p) - w.mean().real() * lp_integral(w, config.p);
    return std::pair{2.0 * config.nu * g * g, 2.0 * c * source};
  };
  auto prev_budget = budget(u);
  double dissipated = 0.0, produced = 0.0;

  IntegrationResult result{TrajectoryRecord{}, EvolutionStatus{}, u, 0};
  result.trajectory.nu = config.nu;
  double t = options.t_start;
  auto record = [&](const SpectralField& w, double time) {
    TrajectorySample s = measure(w, time, config.p);
    const double n = s.l2_norm;
    s.energy_residual = n * n + dissipated - norm0 * norm0 - produced;
    result.trajectory.samples.push_back(s);
  };
  record(u, t);

  double dt = config.dt;
  const double tol = 1e-9 * dt;
  bool recorded_last = true;
  while (config.t_end - t > tol) {
    double h = config.t_end - t <= dt * (1.0 + 1e-9) ? config.t_end - t : dt;
    const double norm_u = l2_norm(u);
    SpectralField next(grid);
    int halvings = 0;
    bool failed = false;
    for (;;) {
      bool collapsed = false;
      try {
        next = stepper.step(u, t, h);
      } catch (const StepCollapseError&) {
        collapsed = true;
      }
      const double norm_next = collapsed ? 0.0 : l2_norm(next);
      const bool grew = !collapsed && norm_u > 0.0 && norm_next > config.growth_guard * norm_u;
      if (!collapsed && !grew) break;
      if (halvings == config.max_dt_halvings) {
        result.status.t = t;
        if (collapsed) {
          result.status.kind = EvolutionStatus::Kind::StepCollapse;
          result.status.norm = norm_u;
        } else {
          result.status.kind = EvolutionStatus::Kind::BlowUp;
          result.status.norm = norm_next;
        }
        failed = true;
        break;
      }
      h *= 0.5;
      dt = std::min(dt, h);
      ++halvings;
    }
    if (failed) break;

    const bool last = config.t_end - (t + h) <= tol;
    t = last ? config.t_end : t + h;
    u = std::move(next);
    ++result.steps;

    const auto cur_budget = budget(u);
    dissipated += 0.5 * h * (prev_budget.first + cur_budget.first);
    produced += 0.5 * h * (prev_budget.second + cur_budget.second);
    prev_budget = cur_budget;

    if (options.on_step) options.on_step(result.steps, t, u);

    const double norm = l2_norm(u);
    recorded_last = false;
    if (result.steps % options.sample_every == 0) {
      record(u, t);
      recorded_last = true;
    }
    if (norm >= threshold) {
      result.status = {EvolutionStatus::Kind::BlowUp, t, norm};
      break;
    }
  }
  if (!recorded_last) record(u, t);
  if (result.status.kind == EvolutionStatus::Kind::Completed) {
    result.status.t = t;
    result.status.norm = l2_norm(u);
  }
  result.final_state = std::move(u);
  return result;
}

double xt_norm(std::span<const TimedField> trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("X_T norm of an empty trajectory");
  double out = 0.0;
  for (const auto& s : trajectory) {
    out = std::max(out, l2_norm(s.u));
    if (s.t > 0.0) out = std::max(out, std::sqrt(s.t) * h1_seminorm(s.u));
  }
  return out;
}

PicardReport picard_iterate(const SpectralField& u0, const SolverConfig& config, double horizon,
                            int iterations) {
  if (!(horizon > 0.0 && horizon <= 1.0)) throw std::invalid_argument("Picard horizon must lie in (0, 1]");
  if (iterations < 1) throw std::invalid_argument("Picard iteration count must be >= 1");
  const Stepper stepper(u0.grid(), config);
  const SpectralField start = config.enforce_mean_zero ? project_mean_zero(u0) : u0;
  const std::vector<double> times = time_grid(horizon, config.dt);

  PicardReport report;
  report.horizon = horizon;
  std::vector<TimedField> current = free_evolution(start, stepper, times);
  report.iterate_norms.push_back(xt_norm(current));
  double prev_gap = -1.0;
  bool settled = false;
  for (int j = 0; j < iterations; ++j) {
    std::vector<TimedField> next;
    try {
      next = mild_map(start, stepper, current);
    } catch (const StepCollapseError&) {
      report.converged = false;
      report.limit = std::move(current);
      return report;
    }
    const double norm = xt_norm(next);
    const double gap = xt_norm(difference(next, current));
    report.iterate_norms.push_back(norm);
    if (prev_gap > 0.0) report.contraction_ratios.push_back(gap / prev_gap);
    current = std::move(next);
    if (!(norm <= 1e6)) {
      report.converged = false;
      report.limit = std::move(current);
      return report;
    }
    if (gap <= 1e-13 * std::max(norm, std::numeric_limits<double>::min())) {
      settled = true;
      break;
    }
    prev_gap = gap;
  }
  const auto& r = report.contraction_ratios;
  report.converged =
      settled || (r.size() >= 3 && std::all_of(r.end() - 3, r.end(), [](double x) { return x < 1.0; }));
  report.limit = std::move(current);
  return report;
}

double fit_contraction_constant(const SpectralField& u0, const SolverConfig& config,
                                double pilot_horizon) {
  if (!(pilot_horizon > 0.0 && pilot_horizon <= 1.0))
    throw std::invalid_argument("pilot horizon must lie in (0, 1]");
  const Grid& grid = u0.grid();
  const Stepper stepper(grid, config);
  const SpectralField start = config.enforce_mean_zero ? project_mean_zero(u0) : u0;
  const std::vector<double> times = time_grid(pilot_horizon, config.dt);
  const std::vector<TimedField> u = free_evolution(start, stepper, times);
  const std::vector<TimedField> mapped = mild_map(start, stepper, u);
  const std::vector<TimedField> duhamel = difference(mapped, u);  // N(u) - N(0)

  const int n = grid.dim();
  const double p = config.p;
  const double a = 1.0 - n * (p - 1.0) / 4.0;
  const double b = (2.0 - n * (p - 1.0)) / 4.0;
  const double v = flow_norm_for_horizon(config, grid);
  const double norm0 = l2_norm(start);

  double best = 0.0;
  double u_sup = 0.0, mapped_sup = 0.0, duhamel_sup = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double ti = std::sqrt(t);
    u_sup = std::max({u_sup, l2_norm(u[i].u), ti * h1_seminorm(u[i].u)});
    mapped_sup = std::max({mapped_sup, l2_norm(mapped[i].u), ti * h1_seminorm(mapped[i].u)});
    duhamel_sup = std::max({duhamel_sup, l2_norm(duhamel[i].u), ti * h1_seminorm(duhamel[i].u)});
    if (t == 0.0) continue;
    const double bound = norm0 + std::pow(t, a) * std::pow(u_sup, p) + std::pow(t, b) * v * u_sup;
    if (bound > 0.0) best = std::max(best, mapped_sup / bound);
    const double lipschitz = (std::pow(t, a) * std::pow(u_sup, p - 1.0) + std::pow(t, b) * v) * u_sup;
    if (lipschitz > 0.0) best = std::max(best, duhamel_sup / lipschitz);
  }
  return best;
}

double picard_horizon(const SpectralField& u0, const SolverConfig& config, double constant) {
  const Grid& grid = u0.grid();
  const int n = grid.dim();
  const double p = config.p;
  const double big_m = 10.0 * constant * l2_norm(u0);
  const double v = flow_norm_for_horizon(config, grid);
  const double first = std::pow(10.0 * constant * std::pow(big_m, p - 1.0), 4.0 / (4.0 - n * (p - 1.0)));
  const double second = std::pow(10.0 * constant * v, 4.0 / (2.0 - n * (p - 1.0)));
  const double denom = first + second;
  if (!(denom > 0.0)) return 1.0;
  return std::min(1.0, 1.0 / denom);
}

}  // namespace nlsp
