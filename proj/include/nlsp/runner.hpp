#pragma once

/// JSON-configured experiments: parsing, execution, resume from checkpoints
/// and parallel sweeps.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlsp/dissipation.hpp"
#include "nlsp/evolution.hpp"

namespace nlsp {

enum class ScenarioKind { Simulate, DissipationTime, BlowupScan, EnhancedDissipationSweep, ShearSuppression };

std::string scenario_name(ScenarioKind kind);

struct InitialDataSpec {
  enum class Kind { SingleMode, RandomBand, File };
  Kind kind = Kind::SingleMode;
  /// single_mode: A sin(2 pi k.x), or the constant A when k = 0.
  Wavevector k{1, 0};
  double amplitude = 1.0;
  /// random_band
  int k_max = 4;
  std::uint64_t seed = 0;
  bool seed_given = false;
  /// file: a checkpoint.
  std::string path;
};

struct DissipationSection {
  int truncation = 16;
  double tol = 1e-6;
  bool check_truncation = false;
  int curve_points = 16;
};

struct ScanSection {
  /// Multiples of the sign-flip amplitude A* when relative, else absolute.
  std::vector<double> amplitudes{0.5, 1.0, 2.0};
  bool relative = true;
};

struct EnhancedSection {
  std::vector<double> nus{0.1, 0.05, 0.02, 0.01};
  int k2_max = 128;
  int k1_max = 3;
  double min_decades = 1.5;
};

struct ShearSuppressionSection {
  /// ||<u0>|| as a fraction of the smallness threshold.
  double mean_fraction = 0.1;
  double perp_norm = 1.0;
  /// Random fields used to fit C_p.
  int gn_samples = 200;
  /// t_end = horizon_rates / lambda_nu.
  double horizon_rates = 50.0;
};

struct RunConfig {
  ScenarioKind scenario = ScenarioKind::Simulate;
  int dim = 2;
  int points = 32;
  SolverConfig solver;
  bool flow_given = false;
  InitialDataSpec initial;
  std::string output_dir = "nlsp_out";
  int sample_every = 1;
  std::int64_t checkpoint_every = 0;
  std::uint64_t seed = 0;

  DissipationSection dissipation;
  ScanSection scan;
  EnhancedSection enhanced;
  ShearSuppressionSection shear;

  /// Hex digest of the canonical config document.
  std::string hash;
};

/// Lists every violation found in a config document.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Parses a JSON document. Unknown keys, type mismatches and solver
/// constraint violations are all collected before ConfigError is thrown.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Materializes the initial datum described by the config.
SpectralField make_initial_data(const RunConfig& config);

struct RunOutcome {
  /// 0 success (BlowUp included), 3 numerical failure.
  int exit_code = 0;
  std::string status;
  /// Scalar results also written to summary.json.
  std::map<std::string, double> metrics;
  std::string error;
  std::vector<std::string> files;
};

/// Runs one scenario and writes its artifacts into config.output_dir.
/// Throws std::runtime_error when the output cannot be written.
RunOutcome run(const RunConfig& config);

/// Continues a simulate run from a checkpoint to config.solver.t_end.
RunOutcome resume(const RunConfig& config, const std::filesystem::path& checkpoint);

struct SweepRow {
  std::size_t index = 0;
  std::string scenario;
  std::string status;
  std::map<std::string, double> metrics;
  std::string error;
};

/// Runs configs concurrently (each into its own output_dir) and returns rows
/// in input order. Failures are recorded per row.
std::vector<SweepRow> sweep(const std::vector<RunConfig>& configs, int parallelism);

/// One row per config; metric columns are the union of all row metrics.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Sweep document: {"base": {...}, "runs": [{...overrides}, ...]}. Each run is
/// the base merged with its overrides; output dirs default to <out>/run_<i>.
std::vector<RunConfig> parse_sweep(std::string_view text, const std::string& out_root);

}  // namespace nlsp
