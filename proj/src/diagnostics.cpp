#include "nlsp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlsp/evolution.hpp"
#include "nlsp/random.hpp"

namespace nlsp {

ShearParts shear_decompose(const SpectralField& u) {
  const Grid& g = u.grid();
  if (g.dim() != 2) throw std::invalid_argument("shear decomposition needs a 2-D field");
  const int m = g.points_per_axis();
  SpectralField mean(Grid(1, m));
  SpectralField perp = u;
  for (int i2 = 0; i2 < m; ++i2) {
    mean.coeffs()[i2] = u.coeffs()[i2];  // row k1 = 0
    perp.coeffs()[i2] = Complex{};
  }
  mean.set_mean_zero(u.is_mean_zero());
  perp.set_mean_zero(true);
  return {std::move(mean), std::move(perp)};
}

SpectralField embed_mean_part(const SpectralField& mean_part, const Grid& grid2d) {
  if (mean_part.grid().dim() != 1 || grid2d.dim() != 2 ||
      mean_part.grid().points_per_axis() != grid2d.points_per_axis())
    throw std::invalid_argument("mean part must be 1-D with matching points per axis");
  SpectralField out(grid2d);
  const int m = grid2d.points_per_axis();
  for (int i2 = 0; i2 < m; ++i2) out.coeffs()[i2] = mean_part.coeffs()[i2];
  out.set_mean_zero(mean_part.is_mean_zero());
  return out;
}

double lp_integral(const SpectralField& u, double q) {
  const std::vector<double> x = inverse_transform(u);
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v), q);
  return sum / static_cast<double>(x.size());
}

double pairing_integral(const SpectralField& u, double p) {
  const std::vector<double> x = inverse_transform(u);
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v), p) * v;
  return sum / static_cast<double>(x.size());
}

double blowup_energy(const SpectralField& u, double p) {
  const double g = h1_seminorm(u);
  return 0.5 * g * g - lp_integral(u, p + 1.0) / (p + 1.0);
}

double blowup_threshold_amplitude(const SpectralField& phi, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("sign-flip amplitude needs p > 1");
  const double g = h1_seminorm(phi);
  const double potential = lp_integral(phi, p + 1.0);
  if (!(potential > 0.0)) throw std::invalid_argument("profile is identically zero");
  return std::pow(0.5 * (p + 1.0) * g * g / potential, 1.0 / (p - 1.0));
}

TrajectorySample measure(const SpectralField& u, double t, double p) {
  const Grid& g = u.grid();
  auto c = u.coeffs();
  double l2 = 0.0, h1 = 0.0, mean = 0.0, perp = 0.0, h1_perp = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a = std::norm(c[i]);
    const double lap = g.laplacian_symbol(i);
    l2 += a;
    h1 += lap * a;
    const bool in_mean = g.dim() == 2 ? g.wavevector(i)[0] == 0 : i == 0;
    if (in_mean) {
      mean += a;
    } else {
      perp += a;
      h1_perp += lap * a;
    }
  }
  TrajectorySample s;
  s.t = t;
  s.l2_norm = std::sqrt(l2);
  s.h1_seminorm = std::sqrt(h1);
  s.l2_mean_x1 = std::sqrt(mean);
  s.l2_perp = std::sqrt(perp);
  s.h1_perp = std::sqrt(h1_perp);
  s.blowup_energy = 0.5 * h1 - lp_integral(u, p + 1.0) / (p + 1.0);
  return s;
}

double energy_identity_residual(std::span<const TimedField> trajectory, double p, double nu,
                                double nonlinear_scale) {
  if (trajectory.size() < 3)
    throw std::invalid_argument("energy identity needs at least three samples");
  auto budget = [&](const SpectralField& u) {
    const double g = h1_seminorm(u);
    const double source = pairing_integral(u, p) - u.mean().real() * lp_integral(u, p);
    return std::pair{2.0 * nu * g * g, 2.0 * nonlinear_scale * source};
  };
  double dissipated = 0.0, produced = 0.0;
  auto prev = budget(trajectory[0].u);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const double h = trajectory[i].t - trajectory[i - 1].t;
    const auto cur = budget(trajectory[i].u);
    dissipated += 0.5 * h * (prev.first + cur.first);
    produced += 0.5 * h * (prev.second + cur.second);
    prev = cur;
  }
  const double start = l2_norm(trajectory.front().u);
  const double end = l2_norm(trajectory.back().u);
  return std::abs(end * end + dissipated - start * start - produced);
}

HypothesisTerms h1_h2_terms(const SpectralField& phi, double p) {
  const SpectralField n = nonlocal_nonlinearity(phi, p, 1.0);
  HypothesisTerms out;
  const std::vector<double> x = inverse_transform(phi);
  const std::vector<double> y = inverse_transform(n);
  double pairing = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) pairing += x[i] * y[i];
  out.pairing = pairing / static_cast<double>(x.size());
  const double g = h1_seminorm(phi);
  out.grad_sq = g * g;
  out.nonlinearity_l2 = l2_norm(n);
  out.l2 = l2_norm(phi);
  return out;
}

H1Envelope fit_h1_envelope(std::span<const HypothesisTerms> terms, double p, int dim) {
  H1Envelope out;
  out.f_exponent = (4.0 * (p + 1.0) - 2.0 * (p - 1.0) * dim) / (4.0 - (p - 1.0) * dim);
  double worst = 0.0;
  for (const auto& t : terms) {
    if (t.grad_sq > 0.0) worst = std::max(worst, std::abs(t.pairing) / t.grad_sq);
    if (t.l2 > 0.0) {
      const double excess = std::abs(t.pairing) - 0.5 * t.grad_sq;
      if (excess > 0.0)
        out.f_constant = std::max(out.f_constant, excess / std::pow(t.l2, out.f_exponent));
    }
  }
  out.epsilon0 = std::min(1.0, 1.0 - worst);
  return out;
}

double smallness_threshold(double p, double c_p) {
  if (!(p > 1.0 && p < 2.0))
    throw std::invalid_argument("smallness threshold needs 1 < p < 2 (exponent singular at p = 1)");
  if (!(c_p > 0.0)) throw std::invalid_argument("smallness threshold needs C_p > 0");
  const double exponent = (5.0 - p) / (4.0 * (p - 1.0));
  return 0.25 * std::pow(kFourPiSq / (4.0 * c_p), exponent);
}

double fit_gagliardo_nirenberg_constant(double p, int samples, std::uint64_t seed, int points,
                                        int k_max) {
  const Grid g(1, points);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int band = 1 + s % k_max;
    const SpectralField f = random_band_field(g, band, 1.0, seed + 7919ULL * s);
    const double l2 = l2_norm(f);
    const double d = h1_seminorm(f);
    if (l2 == 0.0 || d == 0.0) continue;
    const double ratio =
        lp_integral(f, p + 1.0) / (std::pow(d, 0.5 * (p - 1.0)) * std::pow(l2, 0.5 * (p + 3.0)));
    best = std::max(best, ratio);
  }
  return best;
}

double mean_growth_constant(double p, double c_p, double nu, double lambda_nu) {
  const double e = 0.5 * (3.0 - p);
  return 20.0 * c_p * std::pow(10.0, 0.5 * (p - 1.0)) * std::pow(2.0 * (3.0 - p), e) *
         std::pow(nu / lambda_nu, e);
}

double mean_part_bound(double p, double c_p, double nu, double lambda_nu, double mean0,
                       double perp0) {
  const double c = mean_growth_constant(p, c_p, nu, lambda_nu);
  const double q = c * std::pow(perp0, p);
  return std::sqrt(std::exp(q) * (mean0 * mean0 + q));
}

BootstrapReport bootstrap_monitor(const TrajectoryRecord& record, double lambda_nu) {
  const auto& s = record.samples;
  if (s.empty()) throw std::invalid_argument("bootstrap monitor needs a non-empty trajectory");
  BootstrapReport out;
  out.lambda_nu_used = lambda_nu;

  // coeff_decay in log space: max_{i<=j} log|perp_j| - log|perp_i| + lambda (t_j - t_i)/4.
  double best_start = -std::numeric_limits<double>::infinity();
  double best_log = -std::numeric_limits<double>::infinity();
  for (const auto& sample : s) {
    if (sample.l2_perp > 0.0) {
      best_start = std::max(best_start, -std::log(sample.l2_perp) - 0.25 * lambda_nu * sample.t);
      best_log = std::max(best_log, std::log(sample.l2_perp) + 0.25 * lambda_nu * sample.t + best_start);
    }
  }
  out.coeff_decay = std::isfinite(best_log) ? std::exp(best_log) : 0.0;

  // Cumulative nu int ||grad u_perp||^2 by the trapezoid rule.
  std::vector<double> cumulative(s.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double h = s[i].t - s[i - 1].t;
    cumulative[i] = cumulative[i - 1] + 0.5 * h * record.nu *
                                            (s[i].h1_perp * s[i].h1_perp + s[i - 1].h1_perp * s[i - 1].h1_perp);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].l2_perp > 0.0)
      out.coeff_gradient = std::max(out.coeff_gradient, (cumulative.back() - cumulative[i]) /
                                                            (s[i].l2_perp * s[i].l2_perp));
  }
  return out;
}

std::array<double, 3> linear_regression(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("regression needs matched samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("regression abscissae are all equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - intercept - slope * x[i];
    ss_res += r * r;
  }
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return {intercept, slope, r2};
}

DecayFit decay_fit(std::span<const std::pair<double, double>> series) {
  if (series.size() < 5) throw std::invalid_argument("decay fit needs at least 5 samples");
  std::vector<double> t, y;
  for (const auto& [time, value] : series) {
    if (!(value > 0.0)) throw std::invalid_argument("decay fit needs positive values");
    t.push_back(time);
    y.push_back(std::log(value));
  }
  const auto [a, b, r2] = linear_regression(t, y);
  return {-b, std::exp(a), r2};
}

PowerLawFit power_law_fit(std::span<const std::pair<double, double>> series) {
  if (series.size() < 3) throw std::invalid_argument("power-law fit needs at least 3 samples");
  std::vector<double> x, y;
  for (const auto& [time, value] : series) {
    if (!(value > 0.0) || !(time > 0.0))
      throw std::invalid_argument("power-law fit needs positive times and values");
    x.push_back(std::log(time));
    y.push_back(std::log(value));
  }
  const auto [a, b, r2] = linear_regression(x, y);
  return {b, std::exp(a), r2};
}

SpectralField random_band_field(const Grid& grid, int k_max, double amplitude, std::uint64_t seed) {
  SpectralField u(grid);
  u.set_mean_zero(true);
  if (amplitude == 0.0) return u;
  const CounterRng rng(seed, 0x5eed);
  const int k2_max = grid.dim() == 2 ? k_max : 0;
  const int span = 2 * k_max + 1;
  for (int k1 = 0; k1 <= k_max; ++k1) {
    for (int k2 = -k2_max; k2 <= k2_max; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const Wavevector k{k1, k2};
      const Wavevector minus{-k1, -k2};
      if (!grid.contains(k) || !grid.contains(minus)) continue;
      const auto counter = 2ULL * static_cast<std::uint64_t>((k1 + k_max) * span + (k2 + k_max));
      const Complex c(rng.symmetric(counter), rng.symmetric(counter + 1));
      u[k] = c;
      u[minus] = std::conj(c);
    }
  }
  const double norm = l2_norm(u);
  if (norm > 0.0) u *= amplitude / norm;
  return u;
}

}  // namespace nlsp
