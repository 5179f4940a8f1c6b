#pragma once

/// Divergence-free velocity families: zero, shear (v1(x2), 0), cellular,
/// time-rescaled flows A v(x, A t), and user-sampled fields.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nlsp/spectral.hpp"

namespace nlsp {

struct FlowSpec;

struct ZeroFlow {};

/// Horizontal shear (v1(x2), 0). The profile is sampled uniformly on [0,1)
/// with a power-of-two sample count; critical_order is the declared m.
struct ShearFlow {
  std::vector<double> profile;
  int critical_order = 2;

  /// amplitude * sin(2 pi x2), m = 2.
  static ShearFlow sine(double amplitude = 1.0, int samples = 64);
  /// amplitude * sin(2 pi x2)^3, m = 3 (v1' = v1'' = 0 where sin vanishes).
  static ShearFlow sine_cubed(double amplitude = 1.0, int samples = 64);
};

/// 2 pi A (-sin(2 pi x/l) cos(2 pi y/l), cos(2 pi x/l) sin(2 pi y/l)) with
/// l = 1 / cells_per_side.
struct CellularFlow {
  double amplitude = 1.0;
  int cells_per_side = 1;

  double cell_scale() const { return 1.0 / cells_per_side; }
};

/// A * base(x, A t).
struct RescaledMixing {
  std::shared_ptr<const FlowSpec> base;
  double amplitude = 1.0;
};

/// Velocity components sampled on a square grid of points_per_axis^2 points.
struct CustomFlow {
  int points_per_axis = 0;
  std::vector<double> v1;
  std::vector<double> v2;
};

struct FlowSpec {
  std::variant<ZeroFlow, ShearFlow, CellularFlow, RescaledMixing, CustomFlow> variant;

  FlowSpec() = default;
  template <class T>
  FlowSpec(T v) : variant(std::move(v)) {}

  bool is_zero() const { return std::holds_alternative<ZeroFlow>(variant); }
  bool is_steady() const { return !std::holds_alternative<RescaledMixing>(variant); }
  std::string name() const;
};

/// Cellular flow for cell scale l; throws unless 1/l is a positive integer.
CellularFlow make_cellular(double amplitude, double cell_scale);
FlowSpec make_rescaled(FlowSpec base, double amplitude);

struct VelocitySample {
  std::vector<std::vector<double>> components;
  double time = 0.0;
};

/// Samples the velocity on `grid` at time t. Shear, cellular and custom flows
/// need a two-dimensional grid.
VelocitySample evaluate_flow(const FlowSpec& spec, const Grid& grid, double t = 0.0);

/// Max over the grid of |d1 v1 + d2 v2| computed spectrally at t = 0.
double check_incompressible(const FlowSpec& spec, const Grid& grid);

/// Discrete L^q norm of |v| on the grid; q = infinity gives the max.
double flow_lq_norm(const FlowSpec& spec, const Grid& grid, double q, double t = 0.0);

/// Order m of the most degenerate critical point of a periodic profile: one
/// plus the number of leading derivatives that vanish there. Derivative i is
/// treated as zero when below tol * ||v1||_{H^i-dot}. Throws std::domain_error
/// for a constant profile.
int shear_critical_order(std::span<const double> profile, double tol = 1e-6);

/// Spectrally resamples a periodic 1-D profile to `points` samples.
std::vector<double> resample_profile(std::span<const double> profile, int points);

}  // namespace nlsp
