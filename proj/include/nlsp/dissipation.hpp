#pragma once

/// Linear advection-diffusion H = -nu Lap + v . grad on a truncated mean-zero
/// Fourier basis: solution-operator norms, dissipation times, enhanced
/// dissipation rates of shear flows and pure-transport mixing norms.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "nlsp/diagnostics.hpp"
#include "nlsp/flow.hpp"
#include "nlsp/spectral.hpp"

namespace nlsp {

struct TruncatedOperator {
  int truncation = 0;
  /// Evaluation grid used for the pseudo-spectral matrix entries.
  int grid_points = 0;
  double nu = 1.0;
  bool time_dependent = false;
  FlowSpec flow;
  /// Mean-zero modes with |k|_inf <= K, in basis order.
  std::vector<Wavevector> modes;
  /// <e_k, H e_j> in the complex exponential basis.
  Eigen::MatrixXcd matrix;

  /// The same operator in the real basis sqrt2 cos(2 pi k.x), sqrt2 sin(2 pi k.x),
  /// split into the connected blocks of its sparsity pattern.
  std::vector<Eigen::MatrixXd> real_blocks;
  std::vector<std::vector<int>> block_members;

  std::size_t basis_dim() const { return modes.size(); }
};

/// Mean-zero modes 0 < |k|_inf <= K on an N-dimensional lattice, row-major in k.
std::vector<Wavevector> truncated_modes(int dim, int truncation);

/// Builds H by pseudo-spectral application to every basis mode. grid_points = 0
/// picks the smallest power of two >= 3K. Throws std::invalid_argument when
/// 3K exceeds grid_points. Time-dependent flows are frozen at t = 0 and flagged.
TruncatedOperator build_operator(const FlowSpec& flow, double nu, int truncation, int dim = 2,
                                 int grid_points = 0);

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value of a real matrix by power iteration on S^T S from a
/// fixed pseudo-random start vector.
PowerIterationResult largest_singular_value(const Eigen::MatrixXd& s, double tol = 1e-8,
                                            int max_iterations = 500);

/// ||exp(-t H)|| on the truncated space. Throws std::overflow_error when the
/// exponential is not finite.
double solution_operator_norm(const TruncatedOperator& op, double t);

struct DissipationOptions {
  double tol = 1e-6;
  /// Norm curve sampled at j * bracket / curve_points, j = 0..curve_points.
  int curve_points = 16;
  /// Also solve at 2K and flag the result when the two differ by >= 5%.
  bool check_truncation = false;
  /// Start times s for time-dependent flows (sup over s).
  int start_samples = 4;
  double start_span = 1.0;
};

struct DissipationTimeResult {
  double tau_star = 0.0;
  int truncation = 0;
  double bisection_tol = 0.0;
  std::vector<std::pair<double, double>> norm_curve;
  double norm_at_tau = 0.0;
  bool truncation_checked = false;
  bool truncation_converged = true;
  double tau_star_refined = 0.0;
};

/// Smallest t with ||S_{0,t}|| <= 1/2 by bisection on [0, 2 ln2 / (nu 4 pi^2)].
DissipationTimeResult dissipation_time(const FlowSpec& flow, double nu, int truncation,
                                       const DissipationOptions& options = {});

/// Same, for an already assembled steady operator.
DissipationTimeResult dissipation_time(const TruncatedOperator& op, const DissipationOptions& options = {});

/// Propagates the real basis of the truncated space from time s to s + t with
/// the linear stepper (nu, flow) and returns ||S_{s,s+t}|| at every step.
std::vector<std::pair<double, double>> propagate_basis(const FlowSpec& flow, double nu, int truncation,
                                                       double start, double horizon, double dt,
                                                       int grid_points = 0);

/// Per-x1-frequency block of H for a shear flow: diagonal nu 4 pi^2 (k1^2 + k2^2)
/// plus 2 pi i k1 times the multiplication matrix of v1 on |k2| <= K2.
Eigen::MatrixXcd shear_block(const ShearFlow& shear, double nu, int k1, int k2_max);

struct EnhancedDissipationOptions {
  /// x2 truncation of the shear blocks.
  int k2_max = 128;
  /// x1 band of the random initial datum.
  int k1_max = 3;
  std::uint64_t seed = 7;
  /// Decay factor that ends the pilot pass.
  double decay_target = 1e-8;
  int fit_steps = 400;
  double min_r_squared = 0.9;
  /// Smallest accepted log10(max nu / min nu) for the fit.
  double min_decades = 1.5;
};

struct RateSample {
  double nu = 0.0;
  double rate = 0.0;
  double horizon = 0.0;
  double r_squared = 0.0;
};

struct EnhancedDissipationFit {
  /// Slope of log lambda_nu against log nu.
  double exponent = 0.0;
  /// exp(intercept): the fitted c0.
  double prefactor = 0.0;
  double r_squared = 0.0;
  std::vector<RateSample> rates;
};

/// Decay rate of ||u_perp|| for one nu under H_nu, fitted on [0.2 T, T].
RateSample enhanced_dissipation_rate(const ShearFlow& shear, double nu,
                                     const EnhancedDissipationOptions& options = {});

/// Needs at least 4 viscosities spanning options.min_decades decades. Throws std::runtime_error
/// when a decay window is not exponential (R^2 below options.min_r_squared).
EnhancedDissipationFit enhanced_dissipation_fit(const ShearFlow& shear, std::span<const double> nus,
                                                const EnhancedDissipationOptions& options = {});

/// Inhomogeneous H^{-1} norms of u0 transported exactly by (v1(x2), 0):
/// u^(k1, x2, t) = u0^(k1, x2) exp(-2 pi i k1 v1(x2) t). u0 must have no
/// x1-independent content.
std::vector<double> pure_transport_mixing(const SpectralField& u0, const ShearFlow& shear,
                                          std::span<const double> times);

struct MixingReport {
  std::vector<double> times;
  std::vector<double> norms;
  PowerLawFit fit;
  int critical_order = 2;
  /// fit.exponent - (-m) and fit.exponent - (-1/m).
  double gap_to_m = 0.0;
  double gap_to_inverse_m = 0.0;
};

/// Samples pure_transport_mixing on `count` log-spaced times in [t0, t1] and fits
/// the log-log slope.
MixingReport mixing_decay(const SpectralField& u0, const ShearFlow& shear, double t0, double t1,
                          int count);

}  // namespace nlsp
