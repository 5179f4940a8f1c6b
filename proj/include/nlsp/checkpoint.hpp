#pragma once

/// Binary snapshots of a spectral field.
///
/// Layout (little-endian): "NLSP", u32 version, u32 dim, u32 points_per_axis,
/// f64 nu, f64 p, f64 t, then M^N coefficients as interleaved (re, im) f64 in
/// the field's storage order.

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "nlsp/spectral.hpp"

namespace nlsp {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 40;

struct CheckpointMeta {
  double nu = 1.0;
  double p = 1.5;
  double t = 0.0;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes atomically through a temporary file in the same directory.
void save_checkpoint(const SpectralField& u, const CheckpointMeta& meta, const std::filesystem::path& path);

struct LoadedCheckpoint {
  SpectralField field;
  CheckpointMeta meta;
};

/// Throws CheckpointError on a bad magic, unsupported version, inconsistent
/// header or truncated payload.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace nlsp
