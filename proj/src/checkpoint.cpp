#include "nlsp/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace nlsp {

namespace {

template <class T>
void put_le(std::vector<char>& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <class T>
T get_le(const char* data) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, data, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const SpectralField& u, const CheckpointMeta& meta, const std::filesystem::path& path) {
  const Grid& g = u.grid();
  std::vector<char> buf;
  buf.reserve(kCheckpointHeaderBytes + 16 * g.size());
  buf.insert(buf.end(), {'N', 'L', 'S', 'P'});
  put_le<std::uint32_t>(buf, kCheckpointVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.dim()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.points_per_axis()));
  put_le(buf, meta.nu);
  put_le(buf, meta.p);
  put_le(buf, meta.t);
  for (const Complex c : u.coeffs()) {
    put_le(buf, c.real());
    put_le(buf, c.imag());
  }

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kCheckpointHeaderBytes)
    throw CheckpointError("truncated checkpoint " + path.string() + ": " + std::to_string(buf.size()) +
                          " bytes, header needs " + std::to_string(kCheckpointHeaderBytes));
  if (std::memcmp(buf.data(), "NLSP", 4) != 0) throw CheckpointError("bad magic in " + path.string());
  const auto version = get_le<std::uint32_t>(buf.data() + 4);
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (this build reads " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto dim = get_le<std::uint32_t>(buf.data() + 8);
  const auto m = get_le<std::uint32_t>(buf.data() + 12);
  CheckpointMeta meta;
  meta.nu = get_le<double>(buf.data() + 16);
  meta.p = get_le<double>(buf.data() + 24);
  meta.t = get_le<double>(buf.data() + 32);
  if (dim < 1 || dim > 2 || m < 8 || m > (1u << 16))
    throw CheckpointError("inconsistent checkpoint header: dim " + std::to_string(dim) + ", M " + std::to_string(m));
  std::size_t count = m;
  if (dim == 2) count *= m;
  const std::size_t expected = kCheckpointHeaderBytes + 16 * count;
  if (buf.size() != expected)
    throw CheckpointError("checkpoint " + path.string() + " has " + std::to_string(buf.size()) + " bytes, expected " +
                          std::to_string(expected));
  Grid grid(static_cast<int>(dim), static_cast<int>(m));
  std::vector<Complex> coeffs(count);
  const char* p = buf.data() + kCheckpointHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, p += 16) coeffs[i] = {get_le<double>(p), get_le<double>(p + 8)};
  const bool mean_zero = coeffs[0] == Complex{};
  return {SpectralField(grid, std::move(coeffs), mean_zero), meta};
}

}  // namespace nlsp
