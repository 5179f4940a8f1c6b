#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "doctest.h"
#include "nlsp/dissipation.hpp"

using namespace nlsp;

namespace {

const double kHeatTau = std::log(2.0) / kFourPiSq;

int index_of(const TruncatedOperator& op, Wavevector k) {
  for (std::size_t i = 0; i < op.modes.size(); ++i)
    if (op.modes[i] == k) return static_cast<int>(i);
  return -1;
}

// Spectral abscissa of a complex matrix, computed with a dense eigensolver.
double slowest_eigenvalue(const Eigen::MatrixXcd& h) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h);
  return solver.eigenvalues().real().minCoeff();
}

}  // namespace

TEST_CASE("truncated modes cover the mean-zero cube") {
  CHECK(truncated_modes(2, 3).size() == 48u);
  CHECK(truncated_modes(1, 5).size() == 10u);
  for (const Wavevector k : truncated_modes(2, 2)) CHECK((k[0] != 0 || k[1] != 0));
  CHECK_THROWS_AS(truncated_modes(2, 0), std::invalid_argument);
}

TEST_CASE("zero flow operator is the diagonal Laplacian") {
  const TruncatedOperator op = build_operator(FlowSpec{}, 0.7, 4);
  for (std::size_t i = 0; i < op.modes.size(); ++i) {
    const Wavevector k = op.modes[i];
    CHECK(op.matrix(i, i).real() == doctest::Approx(0.7 * kFourPiSq * (k[0] * k[0] + k[1] * k[1])));
  }
  const Eigen::MatrixXcd off = op.matrix - Eigen::MatrixXcd(op.matrix.diagonal().asDiagonal());
  CHECK(off.cwiseAbs().maxCoeff() == 0.0);
  std::size_t total = 0;
  for (const auto& b : op.real_blocks) {
    CHECK(b.rows() == 1);
    total += b.rows();
  }
  CHECK(total == op.basis_dim());
}

TEST_CASE("too large a truncation for the evaluation grid is rejected") {
  CHECK_THROWS_AS(build_operator(FlowSpec{}, 1.0, 8, 2, 16), std::invalid_argument);
  CHECK_NOTHROW(build_operator(FlowSpec{}, 1.0, 5, 2, 16));
}

TEST_CASE("zero-flow dissipation time is ln2 / (4 pi^2 nu)") {
  const DissipationTimeResult r = dissipation_time(FlowSpec{}, 1.0, 4);
  CHECK(std::abs(r.tau_star - kHeatTau) < 1e-6);
  CHECK(r.tau_star >= kHeatTau);
  CHECK(r.norm_at_tau <= 0.5);
  CHECK(r.norm_curve.front().second == doctest::Approx(1.0));
  const DissipationTimeResult slow = dissipation_time(FlowSpec{}, 0.25, 4);
  CHECK(slow.tau_star == doctest::Approx(4.0 * r.tau_star).epsilon(1e-5));
}

TEST_CASE("advection part is skew-Hermitian for divergence-free flows") {
  const double nu = 0.3;
  for (const FlowSpec& flow : {FlowSpec{make_cellular(5.0, 0.5)}, FlowSpec{ShearFlow::sine(2.0)}}) {
    const TruncatedOperator op = build_operator(flow, nu, 6);
    Eigen::MatrixXcd a = op.matrix;
    for (std::size_t i = 0; i < op.modes.size(); ++i) {
      const Wavevector k = op.modes[i];
      a(i, i) -= nu * kFourPiSq * (k[0] * k[0] + k[1] * k[1]);
    }
    CHECK((a + a.adjoint()).cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("sine shear couples k2 to k2 +- 1 with weight pi |k1|") {
  const TruncatedOperator op = build_operator(ShearFlow::sine(), 1.0, 4);
  for (std::size_t j = 0; j < op.modes.size(); ++j) {
    const Wavevector kj = op.modes[j];
    for (std::size_t i = 0; i < op.modes.size(); ++i) {
      if (i == j) continue;
      const Wavevector ki = op.modes[i];
      const bool neighbour = ki[0] == kj[0] && std::abs(ki[1] - kj[1]) == 1;
      const double expected = neighbour ? kPi * std::abs(kj[0]) : 0.0;
      CHECK(std::abs(op.matrix(i, j)) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("shear block agrees with the assembled operator") {
  const ShearFlow shear = ShearFlow::sine_cubed(1.5);
  const double nu = 0.2;
  const int k = 5;
  const TruncatedOperator op = build_operator(FlowSpec{shear}, nu, k);
  for (int k1 : {1, -2, 3}) {
    const Eigen::MatrixXcd block = shear_block(shear, nu, k1, k);
    for (int a = -k; a <= k; ++a) {
      for (int b = -k; b <= k; ++b) {
        const int ia = index_of(op, {k1, a});
        const int ib = index_of(op, {k1, b});
        CHECK(std::abs(block(a + k, b + k) - op.matrix(ia, ib)) < 1e-10);
      }
    }
  }
}

TEST_CASE("power iteration matches a dense SVD") {
  std::mt19937 gen(3);
  std::normal_distribution<double> normal;
  for (int n : {1, 5, 40}) {
    Eigen::MatrixXd s(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) s(i, j) = normal(gen);
    const PowerIterationResult r = largest_singular_value(s, 1e-12, 5000);
    const double reference = Eigen::JacobiSVD<Eigen::MatrixXd>(s).singularValues()(0);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(reference).epsilon(1e-5));
  }
}

TEST_CASE("solution operator is a contraction and nonincreasing in t") {
  const TruncatedOperator op = build_operator(make_cellular(20.0, 1.0), 1.0, 6);
  double previous = 1.0;
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.002 * i;
    const double n = solution_operator_norm(op, t);
    CHECK(n <= 1.0 + 1e-12);
    CHECK(n <= previous + 1e-9);
    previous = n;
  }
  CHECK(solution_operator_norm(op, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("block norm equals the norm of the full real exponential") {
  const TruncatedOperator op = build_operator(make_cellular(10.0, 1.0), 1.0, 3);
  const double t = 0.01;
  // Full complex exponential, whose 2-norm equals the real-basis norm (unitary change of basis).
  const Eigen::MatrixXcd full = (-t * op.matrix).exp();
  const double reference = Eigen::JacobiSVD<Eigen::MatrixXcd>(full).singularValues()(0);
  CHECK(solution_operator_norm(op, t) == doctest::Approx(reference).epsilon(1e-6));
}

TEST_CASE("cellular stirring shortens the dissipation time") {
  const double heat = dissipation_time(FlowSpec{}, 1.0, 8).tau_star;
  const double stirred = dissipation_time(make_cellular(50.0, 1.0), 1.0, 8).tau_star;
  CHECK(stirred < heat);
}

TEST_CASE("truncation check reports agreement for the heat semigroup") {
  DissipationOptions o;
  o.check_truncation = true;
  const DissipationTimeResult r = dissipation_time(FlowSpec{}, 1.0, 3, o);
  CHECK(r.truncation_checked);
  CHECK(r.truncation_converged);
  CHECK(r.tau_star_refined == doctest::Approx(r.tau_star).epsilon(1e-6));
}

TEST_CASE("basis propagation reproduces the matrix exponential") {
  const FlowSpec flow = make_cellular(5.0, 1.0);
  const TruncatedOperator op = build_operator(flow, 1.0, 4);
  const auto curve = propagate_basis(flow, 1.0, 4, 0.0, 0.02, 1e-4);
  for (std::size_t i = 40; i < curve.size(); i += 40) {
    CHECK(curve[i].second == doctest::Approx(solution_operator_norm(op, curve[i].first)).epsilon(1e-3));
  }
}

TEST_CASE("time-dependent path recovers the heat dissipation time") {
  DissipationOptions o;
  o.start_samples = 2;
  const DissipationTimeResult r = dissipation_time(make_rescaled(FlowSpec{}, 3.0), 1.0, 3, o);
  CHECK(r.tau_star == doctest::Approx(kHeatTau).epsilon(1e-4));
  CHECK_THROWS_AS(dissipation_time(build_operator(make_rescaled(make_cellular(1.0, 1.0), 2.0), 1.0, 3)),
                  std::invalid_argument);
}

TEST_CASE("shear decay rate equals the spectral abscissa of the slowest block") {
  const ShearFlow shear = ShearFlow::sine();
  EnhancedDissipationOptions o;
  o.k2_max = 48;
  for (double nu : {0.05, 0.01}) {
    const RateSample r = enhanced_dissipation_rate(shear, nu, o);
    double slowest = INFINITY;
    for (int k1 = 1; k1 <= o.k1_max; ++k1) slowest = std::min(slowest, slowest_eigenvalue(shear_block(shear, nu, k1, o.k2_max)));
    CHECK(r.rate == doctest::Approx(slowest).epsilon(2e-3));
    CHECK(r.r_squared > 0.99);
    CHECK(r.rate > nu * kFourPiSq);
  }
}

TEST_CASE("pure diffusion gives rate nu 4 pi^2 and exponent 1") {
  const ShearFlow still = ShearFlow::sine(0.0);
  EnhancedDissipationOptions o;
  o.k2_max = 8;
  const std::vector<double> nus{0.1, 0.03, 0.01, 0.003};
  const EnhancedDissipationFit fit = enhanced_dissipation_fit(still, nus, o);
  CHECK(fit.exponent == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.prefactor == doctest::Approx(kFourPiSq).epsilon(1e-4));
  for (const RateSample& r : fit.rates) CHECK(r.rate == doctest::Approx(r.nu * kFourPiSq).epsilon(1e-4));
}

TEST_CASE("doubling the shear amplitude rescales time") {
  // H_{nu, 2v} = 2 H_{nu/2, v}, so the rate at (2v, nu) is twice the rate at (v, nu/2).
  EnhancedDissipationOptions o;
  o.k2_max = 48;
  const RateSample doubled = enhanced_dissipation_rate(ShearFlow::sine(2.0), 0.02, o);
  const RateSample base = enhanced_dissipation_rate(ShearFlow::sine(1.0), 0.01, o);
  CHECK(doubled.rate == doctest::Approx(2.0 * base.rate).epsilon(1e-3));
}

TEST_CASE("enhanced dissipation fit validates its viscosity list") {
  const ShearFlow shear = ShearFlow::sine();
  const std::vector<double> few{0.1, 0.01, 0.001};
  CHECK_THROWS_AS(enhanced_dissipation_fit(shear, few), std::invalid_argument);
  const std::vector<double> narrow{0.1, 0.08, 0.06, 0.05};
  CHECK_THROWS_AS(enhanced_dissipation_fit(shear, narrow), std::invalid_argument);
}

TEST_CASE("mixing norm at t = 0 is the inhomogeneous H^-1 norm") {
  const Grid g(2, 16);
  SpectralField u0(g);
  u0[{1, 2}] = Complex(0.3, 0.1);
  u0[{-1, -2}] = Complex(0.3, -0.1);
  u0[{2, -1}] = 0.5;
  u0[{-2, 1}] = 0.5;
  double expected = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Wavevector k = g.wavevector(i);
    expected += std::norm(u0.coeffs()[i]) / (1.0 + kFourPiSq * (k[0] * k[0] + k[1] * k[1]));
  }
  const std::vector<double> times{0.0};
  const auto norms = pure_transport_mixing(u0, ShearFlow::sine(), times);
  CHECK(norms[0] == doctest::Approx(std::sqrt(expected)).epsilon(1e-12));
}

TEST_CASE("uniform translation preserves the mixing norm") {
  const Grid g(2, 16);
  SpectralField u0(g);
  u0[{1, 1}] = 1.0;
  u0[{-1, -1}] = 1.0;
  ShearFlow uniform;
  uniform.profile.assign(16, 0.7);
  const std::vector<double> times{0.0, 1.0, 10.0};
  const auto norms = pure_transport_mixing(u0, uniform, times);
  for (double n : norms) CHECK(n == doctest::Approx(norms[0]).epsilon(1e-12));
}

TEST_CASE("mixing rejects x1-independent content and decays under a sine shear") {
  const Grid g(2, 16);
  SpectralField mean(g);
  mean[{0, 1}] = 1.0;
  mean[{0, -1}] = 1.0;
  const std::vector<double> times{1.0};
  CHECK_THROWS_AS(pure_transport_mixing(mean, ShearFlow::sine(), times), std::invalid_argument);

  SpectralField u0(g);
  u0[{1, 0}] = 1.0;
  u0[{-1, 0}] = 1.0;
  const MixingReport r = mixing_decay(u0, ShearFlow::sine(), 1.0, 20.0, 12);
  CHECK(r.fit.exponent < 0.0);
  CHECK(r.fit.r_squared > 0.9);
  CHECK(r.gap_to_m == doctest::Approx(r.fit.exponent + 2.0));
  CHECK(r.gap_to_inverse_m == doctest::Approx(r.fit.exponent + 0.5));
}
