#include "nlsp/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlsp {

namespace {

std::vector<double> sample_profile(int samples, auto&& f) {
  std::vector<double> out(samples);
  for (int i = 0; i < samples; ++i) out[i] = f(static_cast<double>(i) / samples);
  return out;
}

std::vector<double> resample_square(std::span<const double> field, int from, int to) {
  if (from == to) return {field.begin(), field.end()};
  const Grid src(2, from);
  const Grid dst(2, to);
  SpectralField in = forward_transform(src, field);
  SpectralField out(dst);
  const int band = std::min(from, to) / 2;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Wavevector k = src.wavevector(i);
    if (std::abs(k[0]) < band && std::abs(k[1]) < band) out[k] = in.coeffs()[i];
  }
  return inverse_transform(out);
}

// d^order/dx^order of the trigonometric interpolant at x.
double profile_derivative(std::span<const Complex> coeffs, int m, int order, double x) {
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const int k = i <= m / 2 ? i : i - m;
    if (2 * std::abs(k) == m) continue;
    const Complex factor = std::pow(Complex(0.0, kTwoPi * k), order);
    sum += (factor * coeffs[i] * std::polar(1.0, kTwoPi * k * x)).real();
  }
  return sum;
}

}  // namespace

ShearFlow ShearFlow::sine(double amplitude, int samples) {
  return {sample_profile(samples, [&](double y) { return amplitude * std::sin(kTwoPi * y); }), 2};
}

ShearFlow ShearFlow::sine_cubed(double amplitude, int samples) {
  return {sample_profile(samples,
                         [&](double y) { return amplitude * std::pow(std::sin(kTwoPi * y), 3); }),
          3};
}

std::string FlowSpec::name() const {
  struct Visitor {
    std::string operator()(const ZeroFlow&) const { return "zero"; }
    std::string operator()(const ShearFlow&) const { return "shear"; }
    std::string operator()(const CellularFlow&) const { return "cellular"; }
    std::string operator()(const RescaledMixing&) const { return "rescaled_mixing"; }
    std::string operator()(const CustomFlow&) const { return "custom"; }
  };
  return std::visit(Visitor{}, variant);
}

CellularFlow make_cellular(double amplitude, double cell_scale) {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("cellular amplitude must be >= 0");
  if (!(cell_scale > 0.0 && cell_scale <= 1.0))
    throw std::invalid_argument("cell scale must lie in (0, 1]");
  const double cells = 1.0 / cell_scale;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * cells)
    throw std::invalid_argument("cell scale must divide 1 (l = 1/n)");
  return {amplitude, static_cast<int>(rounded)};
}

FlowSpec make_rescaled(FlowSpec base, double amplitude) {
  return RescaledMixing{std::make_shared<const FlowSpec>(std::move(base)), amplitude};
}

std::vector<double> resample_profile(std::span<const double> profile, int points) {
  const int from = static_cast<int>(profile.size());
  if (from == points) return {profile.begin(), profile.end()};
  const Grid src(1, from);
  const Grid dst(1, points);
  SpectralField in = forward_transform(src, profile);
  SpectralField out(dst);
  const int band = std::min(from, points) / 2;
  for (int k = -band + 1; k < band; ++k) out[{k, 0}] = in[{k, 0}];
  return inverse_transform(out);
}

VelocitySample evaluate_flow(const FlowSpec& spec, const Grid& grid, double t) {
  const std::size_t n = grid.size();
  VelocitySample out;
  out.time = t;

  auto need_2d = [&](const char* what) {
    if (grid.dim() != 2)
      throw std::invalid_argument(std::string(what) + " flow requires a two-dimensional grid");
  };

  struct Visitor {
    const Grid& grid;
    std::size_t n;
    double t;
    VelocitySample& out;
    decltype(need_2d)& require;

    void operator()(const ZeroFlow&) const {
      out.components.assign(grid.dim(), std::vector<double>(n, 0.0));
    }
    void operator()(const ShearFlow& s) const {
      require("shear");
      const int m = grid.points_per_axis();
      const std::vector<double> v = resample_profile(s.profile, m);
      std::vector<double> v1(n), v2(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) v1[i] = v[i % m];
      out.components = {std::move(v1), std::move(v2)};
    }
    void operator()(const CellularFlow& c) const {
      require("cellular");
      const double scale = kTwoPi * c.cells_per_side;
      const double amp = kTwoPi * c.amplitude;
      std::vector<double> v1(n), v2(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = grid.point(i);
        v1[i] = -amp * std::sin(scale * x) * std::cos(scale * y);
        v2[i] = amp * std::cos(scale * x) * std::sin(scale * y);
      }
      out.components = {std::move(v1), std::move(v2)};
    }
    void operator()(const RescaledMixing& r) const {
      if (!r.base) throw std::invalid_argument("rescaled flow without a base flow");
      VelocitySample base = evaluate_flow(*r.base, grid, r.amplitude * t);
      for (auto& comp : base.components)
        for (double& v : comp) v *= r.amplitude;
      out.components = std::move(base.components);
    }
    void operator()(const CustomFlow& c) const {
      require("custom");
      const std::size_t expected = static_cast<std::size_t>(c.points_per_axis) * c.points_per_axis;
      if (c.v1.size() != expected || c.v2.size() != expected)
        throw std::invalid_argument("custom flow sample count does not match its grid");
      out.components = {resample_square(c.v1, c.points_per_axis, grid.points_per_axis()),
                        resample_square(c.v2, c.points_per_axis, grid.points_per_axis())};
    }
  };
  std::visit(Visitor{grid, n, t, out, need_2d}, spec.variant);
  return out;
}

double check_incompressible(const FlowSpec& spec, const Grid& grid) {
  const VelocitySample v = evaluate_flow(spec, grid, 0.0);
  SpectralField div(grid);
  for (int j = 0; j < grid.dim(); ++j) {
    const SpectralField vj = forward_transform(grid, v.components[j]);
    div += gradient(vj)[j];
  }
  const std::vector<double> d = inverse_transform(div);
  double worst = 0.0;
  for (double x : d) worst = std::max(worst, std::abs(x));
  return worst;
}

double flow_lq_norm(const FlowSpec& spec, const Grid& grid, double q, double t) {
  const VelocitySample v = evaluate_flow(spec, grid, t);
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double mag2 = 0.0;
    for (const auto& comp : v.components) mag2 += comp[i] * comp[i];
    const double mag = std::sqrt(mag2);
    if (std::isinf(q))
      acc = std::max(acc, mag);
    else
      acc += std::pow(mag, q);
  }
  if (std::isinf(q)) return acc;
  return std::pow(acc / grid.size(), 1.0 / q);
}

int shear_critical_order(std::span<const double> profile, double tol) {
  const int m = static_cast<int>(profile.size());
  const Grid g(1, m);
  const SpectralField field = forward_transform(g, profile);
  const auto c = field.coeffs();

  std::vector<double> seminorm(8, 0.0);
  for (int order = 1; order < 8; ++order)
    seminorm[order] = sobolev_norm(field, {static_cast<double>(order), true});
  if (seminorm[1] <= 1e-12 * (std::abs(c[0]) + l2_norm(field)) || seminorm[1] == 0.0)
    throw std::domain_error("no shearing: profile is constant");

  auto d = [&](int order, double x) { return profile_derivative(c, m, order, x); };

  // Bisection for a sign change of derivative `order` on [a, b].
  auto bisect = [&](int order, double a, double b) {
    double fa = d(order, a);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = d(order, mid);
      if ((fa <= 0.0) == (fm <= 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };

  const int fine = 16 * m;
  const double h = 1.0 / fine;
  std::vector<double> slope(fine);
  double slope_max = 0.0;
  for (int i = 0; i < fine; ++i) {
    slope[i] = d(1, i * h);
    slope_max = std::max(slope_max, std::abs(slope[i]));
  }

  std::vector<double> critical;
  for (int i = 0; i < fine; ++i) {
    const int prev = (i + fine - 1) % fine;
    const int next = (i + 1) % fine;
    const double x = i * h;
    if (slope[i] * slope[next] < 0.0) {
      critical.push_back(bisect(1, x, x + h));
    } else if (std::abs(slope[i]) <= std::abs(slope[prev]) &&
               std::abs(slope[i]) <= std::abs(slope[next]) &&
               std::abs(slope[i]) < 1e-2 * slope_max) {
      const double a = x - h;
      const double b = x + h;
      if (d(1, a) * d(1, b) < 0.0)
        critical.push_back(bisect(1, a, b));
      else if (d(2, a) * d(2, b) < 0.0)
        critical.push_back(bisect(2, a, b));
      else
        critical.push_back(x);
    }
  }

  int order = 0;
  std::vector<double> seen;
  for (double x : critical) {
    x -= std::floor(x);
    if (std::abs(d(1, x)) >= tol * seminorm[1]) continue;
    bool duplicate = false;
    for (double s : seen) {
      const double gap = std::abs(x - s);
      if (std::min(gap, 1.0 - gap) < 1e-6) duplicate = true;
    }
    if (duplicate) continue;
    seen.push_back(x);
    int vanishing = 1;
    while (vanishing + 1 < 8 && std::abs(d(vanishing + 1, x)) < tol * seminorm[vanishing + 1])
      ++vanishing;
    order = std::max(order, vanishing + 1);
  }
  // A smooth periodic nonconstant profile always has critical points.
  return std::max(order, 2);
}

}  // namespace nlsp
