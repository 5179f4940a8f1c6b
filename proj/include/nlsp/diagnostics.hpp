#pragma once

/// Scalar functionals and inequality monitors evaluated on fields and
/// trajectories: blow-up energy, energy-identity residual, the shear
/// decomposition u = <u> + u_perp, hypothesis terms for the nonlinearity,
/// smallness thresholds, bootstrap constants and decay fits.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlsp/spectral.hpp"

namespace nlsp {

/// Diagnostics sampled along a trajectory.
struct TrajectorySample {
  double t = 0.0;
  double l2_norm = 0.0;
  double h1_seminorm = 0.0;
  /// ||<u>||_{L2_{x2}} where <u> is the x1-average.
  double l2_mean_x1 = 0.0;
  double l2_perp = 0.0;
  double blowup_energy = 0.0;
  double energy_residual = 0.0;
  /// ||grad u_perp||_{L2}; feeds the bootstrap monitor, not part of the CSV.
  double h1_perp = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  std::string config_hash;
  double nu = 1.0;
};

struct TimedField {
  double t;
  SpectralField u;
};

struct ShearParts {
  /// <u>(x2) on the one-dimensional grid with the same points per axis.
  SpectralField mean_part;
  /// u - <u> on the original grid.
  SpectralField perp_part;
};

/// Splits a two-dimensional field into its x1-average and the remainder.
/// Throws std::invalid_argument for one-dimensional grids.
ShearParts shear_decompose(const SpectralField& u);

/// Lifts a 1-D profile <u>(x2) to the x1-independent 2-D field.
SpectralField embed_mean_part(const SpectralField& mean_part, const Grid& grid2d);

/// Quadrature of |u|^q over the torus (rectangle rule on the grid samples).
double lp_integral(const SpectralField& u, double q);

/// Quadrature of |u|^p u.
double pairing_integral(const SpectralField& u, double p);

/// E(u) = 1/2 ||grad u||^2 - 1/(p+1) int |u|^{p+1}.
double blowup_energy(const SpectralField& u, double p);

/// Amplitude A at which E(A phi) changes sign:
///   A* = ((p+1)/2 ||grad phi||^2 / int |phi|^{p+1})^{1/(p-1)}.
double blowup_threshold_amplitude(const SpectralField& phi, double p);

/// Diagnostic sample for one field (energy residual left at 0).
TrajectorySample measure(const SpectralField& u, double t, double p);

/// |R(t_end)| with
///   R = ||u(t)||^2 + 2 nu int ||grad u||^2 - ||u0||^2 - 2 c int (int |u|^p u - mean(u) int |u|^p),
/// time integrals by the trapezoid rule over the given samples.
/// Throws std::invalid_argument with fewer than three samples.
double energy_identity_residual(std::span<const TimedField> trajectory, double p, double nu = 1.0,
                                double nonlinear_scale = 1.0);

struct HypothesisTerms {
  double pairing = 0.0;          // int phi N(phi)
  double grad_sq = 0.0;          // ||grad phi||^2
  double nonlinearity_l2 = 0.0;  // ||N(phi)||
  double l2 = 0.0;               // ||phi||
};

HypothesisTerms h1_h2_terms(const SpectralField& phi, double p);

struct H1Envelope {
  /// Largest eps0 with |pairing| <= (1 - eps0) ||grad phi||^2 on every sample (F = 0).
  double epsilon0 = 0.0;
  /// Smallest C with |pairing| <= 1/2 ||grad phi||^2 + C ||phi||^beta.
  double f_constant = 0.0;
  /// beta = (4(p+1) - 2(p-1)N) / (4 - (p-1)N).
  double f_exponent = 0.0;
};

H1Envelope fit_h1_envelope(std::span<const HypothesisTerms> terms, double p, int dim);

/// 1/4 (lambda_1 / (4 C_p))^{(5-p)/(4(p-1))} with lambda_1 = 4 pi^2.
/// Throws std::invalid_argument unless 1 < p < 2 and C_p > 0.
double smallness_threshold(double p, double c_p);

/// Largest observed ratio int|f|^{p+1} / (||f'||^{(p-1)/2} ||f||^{(p+3)/2}) over
/// random band-limited mean-zero 1-D fields: an empirical C_p.
double fit_gagliardo_nirenberg_constant(double p, int samples, std::uint64_t seed,
                                        int points = 256, int k_max = 8);

/// C_{p,nu} = 20 C_p 10^{(p-1)/2} (2(3-p))^{(3-p)/2} (nu / lambda_nu)^{(3-p)/2}.
double mean_growth_constant(double p, double c_p, double nu, double lambda_nu);

/// sqrt(exp(C_{p,nu} ||u_perp(0)||^p) (||<u0>||^2 + C_{p,nu} ||u_perp(0)||^p)):
/// the a-priori bound on ||<u>(t)||.
double mean_part_bound(double p, double c_p, double nu, double lambda_nu, double mean0,
                       double perp0);

struct BootstrapReport {
  double coeff_decay = 0.0;
  double coeff_gradient = 0.0;
  double lambda_nu_used = 0.0;
};

/// Extremal constants over sampled pairs s <= t of
///   ||u_perp(t)|| <= C e^{-lambda (t-s)/4} ||u_perp(s)||,
///   nu int_s^t ||grad u_perp||^2 <= C' ||u_perp(s)||^2.
/// Throws std::invalid_argument for an empty record.
BootstrapReport bootstrap_monitor(const TrajectoryRecord& record, double lambda_nu);

struct DecayFit {
  double rate = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(value) against t; rate = -slope. Needs >= 5 positive samples.
DecayFit decay_fit(std::span<const std::pair<double, double>> series);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(value) against log(t).
PowerLawFit power_law_fit(std::span<const std::pair<double, double>> series);

/// Ordinary least squares y = a + b x, returns {a, b, r^2}.
std::array<double, 3> linear_regression(std::span<const double> x, std::span<const double> y);

/// Random real field with coefficients on 0 < |k|_inf <= k_max, L2 norm `amplitude`.
SpectralField random_band_field(const Grid& grid, int k_max, double amplitude, std::uint64_t seed);

}  // namespace nlsp
