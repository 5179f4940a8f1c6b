#include "nlsp/dissipation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nlsp/evolution.hpp"
#include "nlsp/random.hpp"

namespace nlsp {

namespace {

constexpr double kHalf = 0.5;

bool positive_half(Wavevector k) { return k[0] > 0 || (k[0] == 0 && k[1] > 0); }

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Real basis: column 2p is sqrt2 cos, column 2p+1 is sqrt2 sin of the p-th
// positive-half mode. Each real column touches two complex indices.
struct RealColumn {
  int plus;
  int minus;
  Complex weight_plus;
  Complex weight_minus;
};

std::vector<RealColumn> real_columns(const std::vector<Wavevector>& modes) {
  std::map<Wavevector, int> index;
  for (int i = 0; i < static_cast<int>(modes.size()); ++i) index[modes[i]] = i;
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<RealColumn> cols;
  for (int i = 0; i < static_cast<int>(modes.size()); ++i) {
    const Wavevector k = modes[i];
    if (!positive_half(k)) continue;
    const int j = index.at({-k[0], -k[1]});
    cols.push_back({i, j, Complex(r, 0.0), Complex(r, 0.0)});
    cols.push_back({i, j, Complex(0.0, -r), Complex(0.0, r)});
  }
  return cols;
}

void split_blocks(TruncatedOperator& op) {
  const auto cols = real_columns(op.modes);
  const int n = static_cast<int>(cols.size());
  Eigen::MatrixXd real(n, n);
  double imag_worst = 0.0;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const RealColumn& ca = cols[a];
      const RealColumn& cb = cols[b];
      const Complex v = std::conj(ca.weight_plus) * (op.matrix(ca.plus, cb.plus) * cb.weight_plus +
                                                     op.matrix(ca.plus, cb.minus) * cb.weight_minus) +
                        std::conj(ca.weight_minus) * (op.matrix(ca.minus, cb.plus) * cb.weight_plus +
                                                      op.matrix(ca.minus, cb.minus) * cb.weight_minus);
      real(a, b) = v.real();
      imag_worst = std::max(imag_worst, std::abs(v.imag()));
    }
  }
  const double scale = real.cwiseAbs().maxCoeff();
  if (imag_worst > 1e-8 * std::max(scale, 1.0))
    throw std::runtime_error("operator does not map real fields to real fields (flow not real?)");

  UnionFind uf(n);
  const double cutoff = 1e-13 * scale;
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      if (a != b && std::abs(real(a, b)) > cutoff) uf.unite(a, b);
  std::map<int, std::vector<int>> groups;
  for (int a = 0; a < n; ++a) groups[uf.find(a)].push_back(a);

  op.real_blocks.clear();
  op.block_members.clear();
  for (auto& [root, members] : groups) {
    const int m = static_cast<int>(members.size());
    Eigen::MatrixXd block(m, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) block(i, j) = real(members[i], members[j]);
    op.real_blocks.push_back(std::move(block));
    op.block_members.push_back(std::move(members));
  }
}

Eigen::MatrixXd checked_exp(const Eigen::MatrixXd& block, double t) {
  if (block.rows() == 1) return Eigen::MatrixXd::Constant(1, 1, std::exp(-t * block(0, 0)));
  Eigen::MatrixXd e = (-t * block).exp();
  if (!e.allFinite()) {
    std::ostringstream os;
    os << "matrix exponential overflowed: ||t H||_1 = " << (t * block).cwiseAbs().colwise().sum().maxCoeff()
       << " for a block of size " << block.rows();
    throw std::overflow_error(os.str());
  }
  return e;
}

double block_norm(const Eigen::MatrixXd& s) {
  if (s.rows() == 1) return std::abs(s(0, 0));
  return largest_singular_value(s).value;
}

double bracket_time(double nu) { return 2.0 * std::log(2.0) / (nu * kFourPiSq); }

// Dyadic bisection for one block: level i holds exp(-(B / 2^i) R).
struct BlockBisection {
  double tau = 0.0;
  double norm_at_tau = 0.0;
};

BlockBisection bisect_block(const Eigen::MatrixXd& block, double bracket, int depth) {
  std::vector<Eigen::MatrixXd> level(depth + 1);
  level[depth] = checked_exp(block, bracket / std::ldexp(1.0, depth));
  for (int i = depth - 1; i >= 0; --i) level[i] = level[i + 1] * level[i + 1];
  const double top = block_norm(level[0]);
  if (!(top <= kHalf)) {
    std::ostringstream os;
    os << "bracket failure: ||S(" << bracket << ")|| = " << top << " > 1/2";
    throw std::runtime_error(os.str());
  }
  const int m = static_cast<int>(block.rows());
  Eigen::MatrixXd lo_op = Eigen::MatrixXd::Identity(m, m);
  double lo = 0.0;
  BlockBisection out{bracket, top};
  for (int i = 1; i <= depth; ++i) {
    Eigen::MatrixXd candidate = lo_op * level[i];
    const double norm = block_norm(candidate);
    const double t = lo + bracket / std::ldexp(1.0, i);
    if (norm <= kHalf) {
      out = {t, norm};
    } else {
      lo = t;
      lo_op = std::move(candidate);
    }
  }
  return out;
}

std::vector<double> min_diagonal(const TruncatedOperator& op) {
  std::vector<double> d;
  for (const auto& b : op.real_blocks) d.push_back(b.diagonal().minCoeff());
  return d;
}

double max_velocity(const FlowSpec& flow, const Grid& grid, double t0, double t1) {
  double v = 0.0;
  for (int i = 0; i <= 8; ++i) v = std::max(v, flow_lq_norm(flow, grid, INFINITY, t0 + (t1 - t0) * i / 8.0));
  return v;
}

DissipationTimeResult time_dependent_dissipation(const FlowSpec& flow, double nu, int truncation,
                                                 const DissipationOptions& options) {
  const double bracket = bracket_time(nu);
  const int m = next_grid_size(3.0 * truncation);
  const Grid grid(2, m);
  const double vmax = max_velocity(flow, grid, 0.0, options.start_span + bracket);
  double dt = bracket / 200.0;
  if (vmax > 0.0) dt = std::min(dt, 0.5 / (kTwoPi * truncation * vmax));

  DissipationTimeResult out;
  out.truncation = truncation;
  out.bisection_tol = dt;
  const int samples = std::max(options.start_samples, 1);
  for (int j = 0; j < samples; ++j) {
    const double s = options.start_span * j / samples;
    const auto curve = propagate_basis(flow, nu, truncation, s, bracket, dt, m);
    double tau = bracket;
    double at = curve.back().second;
    for (std::size_t i = 1; i < curve.size(); ++i) {
      if (curve[i].second <= kHalf) {
        const auto [t0, n0] = curve[i - 1];
        const auto [t1, n1] = curve[i];
        tau = n0 == n1 ? t1 : t0 + (t1 - t0) * (n0 - kHalf) / (n0 - n1);
        at = kHalf;
        break;
      }
    }
    if (curve.back().second > kHalf) throw std::runtime_error("bracket failure for time-dependent flow");
    if (tau >= out.tau_star) {
      out.tau_star = tau;
      out.norm_at_tau = at;
      out.norm_curve.clear();
      const std::size_t stride = std::max<std::size_t>(1, (curve.size() - 1) / options.curve_points);
      for (std::size_t i = 0; i < curve.size(); i += stride) out.norm_curve.push_back(curve[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<Wavevector> truncated_modes(int dim, int truncation) {
  if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
  std::vector<Wavevector> out;
  const int k2 = dim == 2 ? truncation : 0;
  for (int a = -truncation; a <= truncation; ++a)
    for (int b = -k2; b <= k2; ++b)
      if (a != 0 || b != 0) out.push_back({a, b});
  return out;
}

TruncatedOperator build_operator(const FlowSpec& flow, double nu, int truncation, int dim,
                                 int grid_points) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be > 0");
  const int m = grid_points > 0 ? grid_points : next_grid_size(3.0 * truncation);
  if (3 * truncation > m) {
    std::ostringstream os;
    os << "truncation K = " << truncation << " too large for an evaluation grid of " << m
       << " points (need K <= M/3)";
    throw std::invalid_argument(os.str());
  }
  TruncatedOperator op;
  op.truncation = truncation;
  op.grid_points = m;
  op.nu = nu;
  op.flow = flow;
  op.time_dependent = !flow.is_steady();
  op.modes = truncated_modes(dim, truncation);
  const int n = static_cast<int>(op.modes.size());
  op.matrix = Eigen::MatrixXcd::Zero(n, n);

  const Grid grid(dim, m);
  for (int j = 0; j < n; ++j) {
    const Wavevector k = op.modes[j];
    op.matrix(j, j) = nu * kFourPiSq * (double(k[0]) * k[0] + double(k[1]) * k[1]);
  }
  if (!flow.is_zero()) {
    const VelocitySample v = evaluate_flow(flow, grid, 0.0);
    auto& fft = detail::workspace(grid);
    std::vector<Complex> samples(grid.size()), coeffs(grid.size());
    std::vector<std::size_t> flat(n);
    for (int i = 0; i < n; ++i) flat[i] = grid.flat_index(op.modes[i]);
    for (int j = 0; j < n; ++j) {
      const Wavevector k = op.modes[j];
      // v . grad e_k = 2 pi i (k . v) e_k, formed on the grid.
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto [x, y] = grid.point(p);
        double kv = k[0] * v.components[0][p];
        if (dim == 2) kv += k[1] * v.components[1][p];
        samples[p] = Complex(0.0, kTwoPi * kv) * std::polar(1.0, kTwoPi * (k[0] * x + k[1] * y));
      }
      fft.to_spectral(samples, coeffs);
      for (int i = 0; i < n; ++i) op.matrix(i, j) += coeffs[flat[i]];
    }
  }
  split_blocks(op);
  return op;
}

PowerIterationResult largest_singular_value(const Eigen::MatrixXd& s, double tol, int max_iterations) {
  const Eigen::Index n = s.cols();
  PowerIterationResult out;
  if (n == 0) return out;
  const CounterRng rng(0x5157a11, 1);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * rng.symmetric(static_cast<std::uint64_t>(i));
  x.normalize();
  double lambda = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd y = s.transpose() * (s * x);
    const double next = x.dot(y);
    const double len = y.norm();
    out.iterations = it;
    if (len == 0.0) {
      lambda = 0.0;
      out.converged = true;
      break;
    }
    x = y / len;
    if (std::abs(next - lambda) <= tol * next) {
      lambda = next;
      out.converged = true;
      break;
    }
    lambda = next;
  }
  out.value = std::sqrt(std::max(lambda, 0.0));
  return out;
}

double solution_operator_norm(const TruncatedOperator& op, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("solution operator needs t >= 0");
  double worst = 0.0;
  for (const auto& block : op.real_blocks) worst = std::max(worst, block_norm(checked_exp(block, t)));
  return worst;
}

DissipationTimeResult dissipation_time(const TruncatedOperator& op, const DissipationOptions& options) {
  if (op.time_dependent)
    throw std::invalid_argument("time-dependent flow: use dissipation_time(flow, ...) which propagates the basis");
  if (!(options.tol > 0.0)) throw std::invalid_argument("bisection tolerance must be > 0");
  const double bracket = bracket_time(op.nu);
  const int depth = std::max(1, static_cast<int>(std::ceil(std::log2(bracket / options.tol))));

  DissipationTimeResult out;
  out.truncation = op.truncation;
  out.bisection_tol = bracket / std::ldexp(1.0, depth);

  // Slowest-decaying blocks first; later blocks are skipped once they are already
  // below 1/2 at the running maximum.
  const std::vector<double> diag = min_diagonal(op);
  std::vector<std::size_t> order(op.real_blocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return diag[a] < diag[b]; });
  for (std::size_t idx : order) {
    const auto& block = op.real_blocks[idx];
    if (out.tau_star > 0.0 && block_norm(checked_exp(block, out.tau_star)) <= kHalf) continue;
    const BlockBisection b = bisect_block(block, bracket, depth);
    if (b.tau > out.tau_star) {
      out.tau_star = b.tau;
      out.norm_at_tau = b.norm_at_tau;
    }
  }

  const int points = std::max(options.curve_points, 1);
  std::vector<double> curve(points + 1, 0.0);
  curve[0] = 1.0;
  for (const auto& block : op.real_blocks) {
    const Eigen::MatrixXd stepper = checked_exp(block, bracket / points);
    Eigen::MatrixXd acc = stepper;
    for (int j = 1; j <= points; ++j) {
      curve[j] = std::max(curve[j], block_norm(acc));
      if (j < points) acc = acc * stepper;
    }
  }
  for (int j = 0; j <= points; ++j) out.norm_curve.emplace_back(bracket * j / points, curve[j]);
  return out;
}

DissipationTimeResult dissipation_time(const FlowSpec& flow, double nu, int truncation,
                                       const DissipationOptions& options) {
  DissipationTimeResult out;
  if (!flow.is_steady()) {
    out = time_dependent_dissipation(flow, nu, truncation, options);
  } else {
    out = dissipation_time(build_operator(flow, nu, truncation), options);
  }
  if (options.check_truncation) {
    DissipationOptions refined = options;
    refined.check_truncation = false;
    refined.curve_points = 1;
    const DissipationTimeResult fine = dissipation_time(flow, nu, 2 * truncation, refined);
    out.truncation_checked = true;
    out.tau_star_refined = fine.tau_star;
    out.truncation_converged = std::abs(fine.tau_star - out.tau_star) < 0.05 * fine.tau_star;
  }
  return out;
}

std::vector<std::pair<double, double>> propagate_basis(const FlowSpec& flow, double nu, int truncation,
                                                       double start, double horizon, double dt,
                                                       int grid_points) {
  if (!(dt > 0.0 && horizon > 0.0)) throw std::invalid_argument("propagation needs dt > 0 and horizon > 0");
  const int m = grid_points > 0 ? grid_points : next_grid_size(3.0 * truncation);
  const Grid grid(2, m);
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.flow = flow;
  cfg.nonlinear = false;
  cfg.scheme = Scheme::Etdrk2;
  cfg.dt = dt;
  const Stepper stepper(grid, cfg);

  const auto modes = truncated_modes(2, truncation);
  std::vector<SpectralField> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (const Wavevector k : modes) {
    if (!positive_half(k)) continue;
    SpectralField c(grid), s(grid);
    c[k] = r;
    c[{-k[0], -k[1]}] = r;
    s[k] = Complex(0.0, -r);
    s[{-k[0], -k[1]}] = Complex(0.0, r);
    c.set_mean_zero(true);
    s.set_mean_zero(true);
    basis.push_back(std::move(c));
    basis.push_back(std::move(s));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index rows = static_cast<Eigen::Index>(grid.size());

  // Power iteration on C^H C, warm-started from the previous step's vector.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n).normalized();
  auto operator_norm = [&](const Eigen::MatrixXcd& c) {
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
      const Eigen::VectorXcd y = c * x.cast<Complex>();
      const Eigen::VectorXd z = (c.adjoint() * y).real();
      const double next = x.dot(z);
      const double len = z.norm();
      if (len == 0.0) return 0.0;
      x = z / len;
      if (std::abs(next - lambda) <= 1e-8 * next) {
        lambda = next;
        break;
      }
      lambda = next;
    }
    return std::sqrt(lambda);
  };

  std::vector<std::pair<double, double>> curve{{0.0, 1.0}};
  const auto steps = static_cast<std::int64_t>(std::ceil(horizon / dt - 1e-9));
  const double h = horizon / steps;
  Eigen::MatrixXcd columns(rows, n);
  for (std::int64_t s = 1; s <= steps; ++s) {
    const double t = start + (s - 1) * h;
    for (Eigen::Index j = 0; j < n; ++j) {
      basis[j] = stepper.step(basis[j], t, h);
      auto c = basis[j].coeffs();
      for (Eigen::Index i = 0; i < rows; ++i) columns(i, j) = c[i];
    }
    curve.emplace_back(s * h, operator_norm(columns));
  }
  return curve;
}

Eigen::MatrixXcd shear_block(const ShearFlow& shear, double nu, int k1, int k2_max) {
  const int samples = static_cast<int>(shear.profile.size());
  const SpectralField v = forward_transform(Grid(1, samples), shear.profile);
  const int n = 2 * k2_max + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const int ka = a - k2_max;
    h(a, a) = nu * kFourPiSq * (double(k1) * k1 + double(ka) * ka);
    for (int b = 0; b < n; ++b) {
      const int q = ka - (b - k2_max);
      if (2 * std::abs(q) >= samples) continue;
      h(a, b) += Complex(0.0, kTwoPi * k1) * v[{q, 0}];
    }
  }
  return h;
}

RateSample enhanced_dissipation_rate(const ShearFlow& shear, double nu,
                                     const EnhancedDissipationOptions& options) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be > 0");
  const int k2 = options.k2_max;
  const int n = 2 * k2 + 1;
  const int band = options.k1_max;

  std::vector<Eigen::MatrixXcd> blocks;
  std::vector<Eigen::VectorXcd> state;
  const CounterRng rng(options.seed, 0xed);
  for (int k1 = 1; k1 <= band; ++k1) {
    blocks.push_back(shear_block(shear, nu, k1, k2));
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
    for (int q = -std::min(band, k2); q <= std::min(band, k2); ++q) {
      const auto counter = 2ULL * static_cast<std::uint64_t>(k1 * (4 * band + 3) + (q + 2 * band + 1));
      c[q + k2] = Complex(rng.symmetric(counter), rng.symmetric(counter + 1));
    }
    state.push_back(std::move(c));
  }
  auto norm_of = [&](const std::vector<Eigen::VectorXcd>& s) {
    double acc = 0.0;
    for (const auto& c : s) acc += 2.0 * c.squaredNorm();
    return std::sqrt(acc);
  };
  auto propagators = [&](double dt) {
    std::vector<Eigen::MatrixXcd> e;
    for (const auto& b : blocks) e.push_back((-dt * b).exp());
    return e;
  };

  const double norm0 = norm_of(state);
  // Pilot pass: coarse steps until the norm has decayed by decay_target.
  const double dt1 = 1.0 / (nu * kFourPiSq) / 20.0;
  {
    const auto e = propagators(dt1);
    std::vector<Eigen::VectorXcd> s = state;
    std::int64_t steps = 0;
    while (norm_of(s) > options.decay_target * norm0) {
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = e[i] * s[i];
      if (++steps > 100000) throw std::runtime_error("pilot pass did not reach the decay target");
    }
    RateSample out;
    out.nu = nu;
    out.horizon = steps * dt1;
    // Fit pass.
    const double dt2 = out.horizon / options.fit_steps;
    const auto e2 = propagators(dt2);
    std::vector<Eigen::VectorXcd> w = state;
    std::vector<std::pair<double, double>> window;
    for (int j = 1; j <= options.fit_steps; ++j) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = e2[i] * w[i];
      const double t = j * dt2;
      if (t >= 0.2 * out.horizon) window.emplace_back(t, norm_of(w));
    }
    const DecayFit fit = decay_fit(window);
    out.rate = fit.rate;
    out.r_squared = fit.r_squared;
    if (fit.r_squared < options.min_r_squared) {
      std::ostringstream os;
      os << "non-exponential decay window for nu = " << nu << ": R^2 = " << fit.r_squared
         << ", rate = " << fit.rate << ", horizon = " << out.horizon;
      throw std::runtime_error(os.str());
    }
    return out;
  }
}

EnhancedDissipationFit enhanced_dissipation_fit(const ShearFlow& shear, std::span<const double> nus,
                                                const EnhancedDissipationOptions& options) {
  if (nus.size() < 4) throw std::invalid_argument("enhanced dissipation fit needs at least 4 viscosities");
  const auto [lo, hi] = std::minmax_element(nus.begin(), nus.end());
  if (!(*lo > 0.0)) throw std::invalid_argument("viscosities must be positive");
  if (std::log10(*hi / *lo) < options.min_decades - 1e-12) {
    std::ostringstream os;
    os << "viscosities span " << std::log10(*hi / *lo) << " decades, need " << options.min_decades;
    throw std::invalid_argument(os.str());
  }
  EnhancedDissipationFit out;
  std::vector<double> x, y;
  for (double nu : nus) {
    const RateSample r = enhanced_dissipation_rate(shear, nu, options);
    out.rates.push_back(r);
    x.push_back(std::log(nu));
    y.push_back(std::log(r.rate));
  }
  const auto [a, b, r2] = linear_regression(x, y);
  out.exponent = b;
  out.prefactor = std::exp(a);
  out.r_squared = r2;
  return out;
}

std::vector<double> pure_transport_mixing(const SpectralField& u0, const ShearFlow& shear,
                                          std::span<const double> times) {
  const Grid& g = u0.grid();
  if (g.dim() != 2) throw std::invalid_argument("pure transport mixing needs a 2-D field");
  const ShearParts parts = shear_decompose(u0);
  if (l2_norm(parts.mean_part) > 1e-12 * std::max(l2_norm(u0), 1e-300))
    throw std::invalid_argument("initial datum has x1-independent content; pass its perpendicular part");
  if (times.empty()) return {};
  const int m = g.points_per_axis();
  const double t_max = *std::max_element(times.begin(), times.end());
  if (!(*std::min_element(times.begin(), times.end()) >= 0.0))
    throw std::invalid_argument("transport times must be >= 0");

  // Largest |v1'| on a fine grid and the active x1 band.
  const int samples = static_cast<int>(shear.profile.size());
  const SpectralField vhat = forward_transform(Grid(1, samples), shear.profile);
  const std::vector<double> slope = inverse_transform(gradient(vhat)[0]);
  double slope_max = 0.0;
  for (double s : slope) slope_max = std::max(slope_max, std::abs(s));
  int k1_max = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(u0.coeffs()[i]) > 0.0) k1_max = std::max(k1_max, std::abs(g.wavevector(i)[0]));
  const int m2 = next_grid_size(4.0 * (k1_max * slope_max * t_max + m / 2));
  const Grid line(1, m2);
  const std::vector<double> v = resample_profile(shear.profile, m2);
  auto& fft = detail::workspace(line);

  struct Column {
    int k1;
    std::vector<Complex> values;  // u0^(k1, x2) on the fine x2 grid
  };
  std::vector<Column> columns;
  std::vector<Complex> spec(m2), phys(m2);
  for (int i1 = 0; i1 < m; ++i1) {
    const int k1 = g.wavenumber(i1);
    if (k1 == 0) continue;
    std::fill(spec.begin(), spec.end(), Complex{});
    bool any = false;
    for (int i2 = 0; i2 < m; ++i2) {
      const Complex c = u0.coeffs()[static_cast<std::size_t>(i1) * m + i2];
      if (c == Complex{}) continue;
      any = true;
      spec[line.index_of(g.wavenumber(i2))] = c;
    }
    if (!any) continue;
    fft.to_physical(spec, phys);
    columns.push_back({k1, phys});
  }

  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    double acc = 0.0;
    for (const auto& col : columns) {
      for (int p = 0; p < m2; ++p) phys[p] = col.values[p] * std::polar(1.0, -kTwoPi * col.k1 * v[p] * t);
      fft.to_spectral(phys, spec);
      for (int q = 0; q < m2; ++q) {
        const double k2 = line.wavenumber(q);
        acc += std::norm(spec[q]) / (1.0 + kFourPiSq * (double(col.k1) * col.k1 + k2 * k2));
      }
    }
    out.push_back(std::sqrt(acc));
  }
  return out;
}

MixingReport mixing_decay(const SpectralField& u0, const ShearFlow& shear, double t0, double t1, int count) {
  if (!(t0 > 0.0 && t1 > t0) || count < 3) throw std::invalid_argument("mixing fit needs 0 < t0 < t1 and >= 3 times");
  MixingReport out;
  for (int i = 0; i < count; ++i) out.times.push_back(t0 * std::pow(t1 / t0, double(i) / (count - 1)));
  out.norms = pure_transport_mixing(u0, shear, out.times);
  std::vector<std::pair<double, double>> series;
  for (std::size_t i = 0; i < out.times.size(); ++i) series.emplace_back(out.times[i], out.norms[i]);
  out.fit = power_law_fit(series);
  out.critical_order = shear.critical_order;
  out.gap_to_m = out.fit.exponent + out.critical_order;
  out.gap_to_inverse_m = out.fit.exponent + 1.0 / out.critical_order;
  return out;
}

}  // namespace nlsp
