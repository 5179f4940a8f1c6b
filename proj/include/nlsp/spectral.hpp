#pragma once

/// Fourier representation of real scalar fields on the unit torus [0,1)^N.
///
/// Coefficients are stored for every frequency of the M^N grid in row-major
/// FFT order: along each axis the index i maps to the wavenumber i for
/// i <= M/2 and to i - M otherwise, so wavenumbers run over -M/2+1 .. M/2.
/// The forward transform divides by M^N, which makes coeffs(0) the spatial
/// mean and Parseval read ||f||_{L2}^2 = sum_k |f^(k)|^2.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nlsp {

using Complex = std::complex<double>;

/// Integer frequency vector; the second entry is 0 on one-dimensional grids.
using Wavevector = std::array<int, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kFourPiSq = 4.0 * kPi * kPi;

class Grid {
 public:
  /// Throws std::invalid_argument unless dim is 1 or 2 and points_per_axis
  /// is a power of two no smaller than 8.
  Grid(int dim, int points_per_axis);

  int dim() const { return dim_; }
  int points_per_axis() const { return m_; }
  double spacing() const { return 1.0 / m_; }
  std::size_t size() const { return size_; }

  int wavenumber(int index) const { return index <= m_ / 2 ? index : index - m_; }
  int index_of(int wavenumber) const { return wavenumber >= 0 ? wavenumber : wavenumber + m_; }

  Wavevector wavevector(std::size_t flat) const;
  std::size_t flat_index(Wavevector k) const;
  /// True when every component of k lies in -M/2+1 .. M/2.
  bool contains(Wavevector k) const;

  /// Physical coordinate of sample `flat`.
  std::array<double, 2> point(std::size_t flat) const;

  /// Symbol of -Laplacian: 4 pi^2 |k|^2.
  double laplacian_symbol(std::size_t flat) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  int m_;
  std::size_t size_;
};

struct SobolevSpec {
  double s = 0.0;
  bool homogeneous = false;
};

class SpectralField {
 public:
  explicit SpectralField(Grid grid);
  SpectralField(Grid grid, std::vector<Complex> coeffs, bool mean_zero = false);

  const Grid& grid() const { return grid_; }
  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }

  Complex& operator[](Wavevector k) { return coeffs_[grid_.flat_index(k)]; }
  const Complex& operator[](Wavevector k) const { return coeffs_[grid_.flat_index(k)]; }

  Complex mean() const { return coeffs_[0]; }
  bool is_mean_zero() const { return mean_zero_; }
  void set_mean_zero(bool flag) { mean_zero_ = flag; }

  bool is_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double factor);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double f, SpectralField a) { return a *= f; }
  friend SpectralField operator*(SpectralField a, double f) { return a *= f; }

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
  bool mean_zero_ = false;
};

SpectralField forward_transform(const Grid& grid, std::span<const double> samples);
std::vector<double> inverse_transform(const SpectralField& u);

/// e^{kappa t Delta} u. Throws std::invalid_argument for t < 0 or kappa <= 0.
SpectralField heat_semigroup(const SpectralField& u, double t, double kappa = 1.0);

double sobolev_norm(const SpectralField& u, SobolevSpec spec);
inline double l2_norm(const SpectralField& u) { return sobolev_norm(u, {0.0, false}); }
/// ||grad u||_{L2}.
inline double h1_seminorm(const SpectralField& u) { return sobolev_norm(u, {1.0, true}); }

/// Real L2 inner product Re sum_k a^(k) conj(b^(k)).
double inner_product(const SpectralField& a, const SpectralField& b);

/// Component j carries the coefficients 2 pi i k_j u^(k).
std::vector<SpectralField> gradient(const SpectralField& u);

SpectralField project_mean_zero(const SpectralField& u);

/// Zeroes every coefficient with some |k_j| > fraction * M / 2.
SpectralField dealias(const SpectralField& u, double fraction = 2.0 / 3.0);

/// Smallest power of two >= n (and >= 8).
int next_grid_size(double n);

namespace detail {

/// Per-thread FFTW workspace for one grid shape. Not shared across threads.
class FftWorkspace {
 public:
  explicit FftWorkspace(const Grid& grid);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;

  /// Samples -> normalized coefficients.
  void to_spectral(std::span<const double> samples, std::span<Complex> coeffs);
  /// Coefficients -> real part of the synthesized samples.
  void to_physical(std::span<const Complex> coeffs, std::span<double> samples);
  /// Complex-valued samples, no symmetry assumed.
  void to_spectral(std::span<const Complex> samples, std::span<Complex> coeffs);
  void to_physical(std::span<const Complex> coeffs, std::span<Complex> samples);

 private:
  Grid grid_;
  Complex* buffer_ = nullptr;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

FftWorkspace& workspace(const Grid& grid);

}  // namespace detail

}  // namespace nlsp
