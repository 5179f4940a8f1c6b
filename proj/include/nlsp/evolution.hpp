#pragma once

/// Time integration of
///   u_t + v . grad u - nu Lap u = c (|u|^p - mean |u|^p)
/// with c = 1 (standard form) or c = nu (shear form, time rescaled by the
/// flow amplitude). Steps are exponential integrators of the Duhamel formula:
/// the diffusion is applied exactly as a Fourier multiplier and the forcing
/// through phi-functions of the same multiplier.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlsp/diagnostics.hpp"
#include "nlsp/flow.hpp"
#include "nlsp/spectral.hpp"

namespace nlsp {

enum class EquationForm { Standard, Shear };
enum class Scheme { Etd1, Etdrk2 };

struct SolverConfig {
  double nu = 1.0;
  double p = 1.5;
  double dt = 1e-3;
  double t_end = 1.0;
  FlowSpec flow;
  double dealias_fraction = 2.0 / 3.0;
  /// Blow-up is declared once ||u||_{L2} >= blowup_threshold * (1 + ||u0||).
  double blowup_threshold = 1e6;
  bool enforce_mean_zero = true;
  EquationForm form = EquationForm::Standard;
  Scheme scheme = Scheme::Etd1;
  /// Drop the |u|^p forcing (linear advection-diffusion).
  bool nonlinear = true;
  /// Step-size guard: a step that grows ||u|| by more than this factor is retried
  /// with half the step, at most max_dt_halvings times.
  double growth_guard = 10.0;
  int max_dt_halvings = 20;

  double nonlinear_scale() const {
    if (!nonlinear) return 0.0;
    return form == EquationForm::Shear ? nu : 1.0;
  }
};

/// Throws std::invalid_argument listing the violated constraint. The exponent
/// must satisfy 1 <= p < 1 + 2/N for the grid dimension N.
void validate(const SolverConfig& config, const Grid& grid);

struct EvolutionStatus {
  enum class Kind { Completed, BlowUp, StepCollapse };
  Kind kind = Kind::Completed;
  /// Completion or detection time.
  double t = 0.0;
  /// ||u||_{L2} at detection (BlowUp) or at the final time.
  double norm = 0.0;

  std::string label() const;
};

/// Thrown when a step produces non-finite coefficients.
class StepCollapseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |u|^p minus its mean, dealiased; flagged mean-zero.
SpectralField nonlocal_nonlinearity(const SpectralField& u, double p,
                                    double dealias_fraction = 2.0 / 3.0);

/// Pseudo-spectral v . grad u at time t, dealiased.
SpectralField advection_term(const SpectralField& u, const FlowSpec& flow, double t,
                             double dealias_fraction = 2.0 / 3.0);

/// Reusable stepper holding the velocity samples and multiplier tables.
class Stepper {
 public:
  Stepper(const Grid& grid, SolverConfig config);

  const Grid& grid() const { return grid_; }
  const SolverConfig& config() const { return config_; }

  /// Forcing F(u, t) = c N(u) - v . grad u with the mean mode removed.
  SpectralField forcing(const SpectralField& u, double t) const;

  /// One exponential-integrator step of size dt from time t. Throws
  /// StepCollapseError on non-finite output.
  SpectralField step(const SpectralField& u, double t, double dt) const;

  /// Linear multiplier e^{-nu 4 pi^2 |k|^2 s} applied in place.
  void apply_semigroup(SpectralField& u, double s) const;

 private:
  struct Tables {
    double dt = 0.0;
    std::vector<double> decay;
    std::vector<double> phi1;
    std::vector<double> phi2;
  };
  const Tables& tables(double dt) const;
  const std::vector<std::vector<double>>& velocity(double t) const;

  Grid grid_;
  SolverConfig config_;
  std::vector<double> symbol_;  // nu * 4 pi^2 |k|^2
  std::vector<char> keep_;      // dealias mask
  mutable Tables cache_;
  mutable std::vector<std::vector<double>> steady_velocity_;
  mutable std::vector<std::vector<double>> velocity_scratch_;
};

/// phi_1(z) = (e^z - 1)/z with a Taylor branch below |z| = 1e-4.
double phi1(double z);
/// phi_2(z) = (e^z - 1 - z)/z^2.
double phi2(double z);

/// One step of the configured scheme from time t.
SpectralField step(const SpectralField& u, double t, const SolverConfig& config);

struct IntegrationResult {
  TrajectoryRecord trajectory;
  EvolutionStatus status;
  SpectralField final_state;
  /// Number of accepted steps.
  std::int64_t steps = 0;
};

struct IntegrateOptions {
  int sample_every = 1;
  /// Start time (used when resuming from a checkpoint).
  double t_start = 0.0;
  /// Called after every accepted step with (step index, t, u); may be empty.
  std::function<void(std::int64_t, double, const SpectralField&)> on_step;
};

/// Integrates to config.t_end or until blow-up / collapse is detected.
IntegrationResult integrate(const SpectralField& u0, const SolverConfig& config,
                            const IntegrateOptions& options = {});

/// max(sup ||u(t)||, sup_{t>0} t^{1/2} ||grad u(t)||) over the samples.
/// Throws std::invalid_argument for an empty trajectory.
double xt_norm(std::span<const TimedField> trajectory);

struct PicardReport {
  double horizon = 0.0;
  std::vector<double> iterate_norms;
  std::vector<double> contraction_ratios;
  bool converged = false;
  /// Final iterate on the time grid.
  std::vector<TimedField> limit;
};

/// Picard iteration u^{j+1} = N(u^j) of the mild-solution map on [0, T],
/// with the Duhamel integral discretized by the trapezoid rule on a grid of
/// spacing <= config.dt. The first iterate is the free heat evolution.
PicardReport picard_iterate(const SpectralField& u0, const SolverConfig& config, double horizon,
                            int iterations);

/// Smallest constant C with
///   ||N(u)(t)|| and t^{1/2} ||grad N(u)(t)|| <= C (||u0|| + t^{1-N(p-1)/4} ||u||_X^p
///                                                 + t^{(2-N(p-1))/4} ||v||_{L^{2/(p-1)}} ||u||_X)
/// on the sampled times, for u the free evolution on [0, pilot_horizon].
double fit_contraction_constant(const SpectralField& u0, const SolverConfig& config,
                                double pilot_horizon);

/// min{1, 1 / ((10 C M^{p-1})^{4/(4-N(p-1))} + (10 C ||v||)^{4/(2-N(p-1))})} with
/// M = 10 C ||u0||.
double picard_horizon(const SpectralField& u0, const SolverConfig& config, double constant);

}  // namespace nlsp
