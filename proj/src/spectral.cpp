#include "nlsp/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace nlsp {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("grid mismatch between fields");
}

}  // namespace

Grid::Grid(int dim, int points_per_axis) : dim_(dim), m_(points_per_axis) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("grid dimension must be 1 or 2, got " + std::to_string(dim));
  if (points_per_axis < 8 || !is_power_of_two(points_per_axis))
    throw std::invalid_argument("points per axis must be a power of two >= 8, got " +
                                std::to_string(points_per_axis));
  size_ = dim == 1 ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(m_) * m_;
}

Wavevector Grid::wavevector(std::size_t flat) const {
  if (dim_ == 1) return {wavenumber(static_cast<int>(flat)), 0};
  return {wavenumber(static_cast<int>(flat / m_)), wavenumber(static_cast<int>(flat % m_))};
}

std::size_t Grid::flat_index(Wavevector k) const {
  if (!contains(k)) throw std::out_of_range("wavevector outside grid band");
  if (dim_ == 1) return static_cast<std::size_t>(index_of(k[0]));
  return static_cast<std::size_t>(index_of(k[0])) * m_ + index_of(k[1]);
}

bool Grid::contains(Wavevector k) const {
  auto in = [this](int w) { return w > -m_ / 2 && w <= m_ / 2; };
  return in(k[0]) && (dim_ == 1 ? k[1] == 0 : in(k[1]));
}

std::array<double, 2> Grid::point(std::size_t flat) const {
  if (dim_ == 1) return {static_cast<double>(flat) / m_, 0.0};
  return {static_cast<double>(flat / m_) / m_, static_cast<double>(flat % m_) / m_};
}

double Grid::laplacian_symbol(std::size_t flat) const {
  const Wavevector k = wavevector(flat);
  return kFourPiSq * (static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]);
}

SpectralField::SpectralField(Grid grid) : grid_(grid), coeffs_(grid.size(), Complex{}) {}

SpectralField::SpectralField(Grid grid, std::vector<Complex> coeffs, bool mean_zero)
    : grid_(grid), coeffs_(std::move(coeffs)), mean_zero_(mean_zero) {
  if (coeffs_.size() != grid_.size())
    throw std::invalid_argument("coefficient count does not match grid");
}

bool SpectralField::is_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  mean_zero_ = mean_zero_ && other.mean_zero_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  mean_zero_ = mean_zero_ && other.mean_zero_;
  return *this;
}

SpectralField& SpectralField::operator*=(double factor) {
  for (auto& c : coeffs_) c *= factor;
  return *this;
}

namespace detail {

FftWorkspace::FftWorkspace(const Grid& grid) : grid_(grid) {
  std::lock_guard lock(planner_mutex());
  buffer_ = reinterpret_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * grid.size()));
  auto* buf = reinterpret_cast<fftw_complex*>(buffer_);
  const int m = grid.points_per_axis();
  if (grid.dim() == 1) {
    forward_ = fftw_plan_dft_1d(m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(m, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  } else {
    forward_ = fftw_plan_dft_2d(m, m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(m, m, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
}

FftWorkspace::~FftWorkspace() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  fftw_free(buffer_);
}

void FftWorkspace::to_spectral(std::span<const double> samples, std::span<Complex> coeffs) {
  const std::size_t n = grid_.size();
  if (samples.size() != n || coeffs.size() != n)
    throw std::invalid_argument("sample count does not match grid");
  for (std::size_t i = 0; i < n; ++i) buffer_[i] = Complex(samples[i], 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_));
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) coeffs[i] = buffer_[i] * scale;
}

void FftWorkspace::to_physical(std::span<const Complex> coeffs, std::span<double> samples) {
  const std::size_t n = grid_.size();
  if (samples.size() != n || coeffs.size() != n)
    throw std::invalid_argument("sample count does not match grid");
  std::copy(coeffs.begin(), coeffs.end(), buffer_);
  fftw_execute(static_cast<fftw_plan>(backward_));
  for (std::size_t i = 0; i < n; ++i) samples[i] = buffer_[i].real();
}

void FftWorkspace::to_spectral(std::span<const Complex> samples, std::span<Complex> coeffs) {
  const std::size_t n = grid_.size();
  if (samples.size() != n || coeffs.size() != n)
    throw std::invalid_argument("sample count does not match grid");
  std::copy(samples.begin(), samples.end(), buffer_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) coeffs[i] = buffer_[i] * scale;
}

void FftWorkspace::to_physical(std::span<const Complex> coeffs, std::span<Complex> samples) {
  const std::size_t n = grid_.size();
  if (samples.size() != n || coeffs.size() != n)
    throw std::invalid_argument("sample count does not match grid");
  std::copy(coeffs.begin(), coeffs.end(), buffer_);
  fftw_execute(static_cast<fftw_plan>(backward_));
  std::copy(buffer_, buffer_ + n, samples.begin());
}

FftWorkspace& workspace(const Grid& grid) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftWorkspace>> cache;
  auto& slot = cache[{grid.dim(), grid.points_per_axis()}];
  if (!slot) slot = std::make_unique<FftWorkspace>(grid);
  return *slot;
}

}  // namespace detail

SpectralField forward_transform(const Grid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size())
    throw std::invalid_argument("sample count " + std::to_string(samples.size()) +
                                " does not match grid size " + std::to_string(grid.size()));
  SpectralField out(grid);
  detail::workspace(grid).to_spectral(samples, out.coeffs());
  return out;
}

std::vector<double> inverse_transform(const SpectralField& u) {
  std::vector<double> samples(u.grid().size());
  detail::workspace(u.grid()).to_physical(u.coeffs(), samples);
  return samples;
}

SpectralField heat_semigroup(const SpectralField& u, double t, double kappa) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat semigroup needs t >= 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("heat semigroup needs kappa > 0");
  SpectralField out = u;
  auto c = out.coeffs();
  const Grid& g = u.grid();
  for (std::size_t i = 1; i < c.size(); ++i) c[i] *= std::exp(-kappa * g.laplacian_symbol(i) * t);
  return out;
}

double sobolev_norm(const SpectralField& u, SobolevSpec spec) {
  const Grid& g = u.grid();
  auto c = u.coeffs();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double lap = g.laplacian_symbol(i);
    double w;
    if (spec.homogeneous) {
      if (i == 0) continue;
      w = spec.s == 0.0 ? 1.0 : std::pow(lap, spec.s);
    } else {
      w = spec.s == 0.0 ? 1.0 : std::pow(1.0 + lap, spec.s);
    }
    sum += w * std::norm(c[i]);
  }
  return std::sqrt(sum);
}

double inner_product(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid(), b.grid());
  auto ca = a.coeffs();
  auto cb = b.coeffs();
  double sum = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i)
    sum += ca[i].real() * cb[i].real() + ca[i].imag() * cb[i].imag();
  return sum;
}

std::vector<SpectralField> gradient(const SpectralField& u) {
  const Grid& g = u.grid();
  std::vector<SpectralField> out;
  for (int j = 0; j < g.dim(); ++j) {
    SpectralField d(g);
    d.set_mean_zero(true);
    auto src = u.coeffs();
    auto dst = d.coeffs();
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] = Complex(0.0, kTwoPi * g.wavevector(i)[j]) * src[i];
    out.push_back(std::move(d));
  }
  return out;
}

SpectralField project_mean_zero(const SpectralField& u) {
  SpectralField out = u;
  out.coeffs()[0] = Complex{};
  out.set_mean_zero(true);
  return out;
}

SpectralField dealias(const SpectralField& u, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("dealias fraction must lie in (0, 1]");
  const Grid& g = u.grid();
  const double cutoff = fraction * g.points_per_axis() / 2.0;
  SpectralField out = u;
  auto c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Wavevector k = g.wavevector(i);
    if (std::abs(k[0]) > cutoff || std::abs(k[1]) > cutoff) c[i] = Complex{};
  }
  return out;
}

int next_grid_size(double n) {
  int m = 8;
  while (m < n) m *= 2;
  return m;
}

}  // namespace nlsp
