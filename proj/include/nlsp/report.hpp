#pragma once

/// Text artifacts written by the runner: trajectory CSV, tables, and a small
/// log-linear SVG plot.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlsp/diagnostics.hpp"

namespace nlsp {

/// Header of trajectory.csv.
inline constexpr const char* kTrajectoryHeader =
    "t,l2_norm,h1_seminorm,l2_mean_x1,l2_perp,blowup_energy,energy_residual";

/// %.17g, so a value read back from the text is bit-identical.
std::string format_double(double x);

std::string trajectory_csv(const TrajectoryRecord& record);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
};

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Log-scale y axis; nonpositive values are dropped.
std::string decay_svg(const std::vector<PlotSeries>& series, const std::string& title);

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tracks files written into one output directory. A failed write records a
/// partial manifest (MANIFEST.partial) listing what was completed, then throws
/// OutputError naming the failing file.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  void write(const std::string& name, const std::string& contents);
  /// Records a file written by another routine (e.g. a checkpoint).
  void record(const std::string& name) { written_.push_back(name); }
  const std::vector<std::string>& written() const { return written_; }
  [[noreturn]] void fail(const std::string& name, const std::string& reason);

 private:
  std::filesystem::path root_;
  std::vector<std::string> written_;
};

}  // namespace nlsp
