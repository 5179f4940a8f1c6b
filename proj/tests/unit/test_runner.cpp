#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nlsp/checkpoint.hpp"
#include "nlsp/report.hpp"
#include "nlsp/runner.hpp"

using namespace nlsp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nlsp_test_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& items, const std::string& needle) {
  for (const auto& s : items)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::string simulate_config(const fs::path& out, double t_end = 0.05) {
  return R"({"grid": {"points": 16}, "solver": {"dt": 1e-3, "t_end": )" + format_double(t_end) +
         R"(}, "flow": {"type": "cellular", "amplitude": 1},
            "initial_data": {"type": "random_band", "k_max": 3, "amplitude": 1, "seed": 9},
            "checkpoint_every": 25, "sample_every": 5, "output_dir": ")" +
         out.string() + "\"}";
}

}  // namespace

TEST_CASE("empty document yields the documented defaults") {
  const RunConfig c = parse_config("{}");
  CHECK(c.scenario == ScenarioKind::Simulate);
  CHECK(c.dim == 2);
  CHECK(c.points == 32);
  CHECK(c.solver.p == 1.5);
  CHECK(c.solver.flow.is_zero());
  CHECK(c.hash.size() == 16);
  CHECK(parse_config("{ }").hash == c.hash);
  CHECK(parse_config(R"({"seed": 3})").hash != c.hash);
}

TEST_CASE("exponent above the critical bound is rejected with the bound quoted") {
  const auto v = violations_of(R"({"solver": {"p": 2.5}})");
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("1 + 2/N = 2") != std::string::npos);
  const auto one_d = violations_of(R"({"grid": {"dim": 1}, "solver": {"p": 3.5}})");
  CHECK(any_contains(one_d, "1 + 2/N = 3"));
}

TEST_CASE("all violations are reported together and unknown keys are named") {
  const auto v = violations_of(
      R"({"bogus": 1, "solver": {"nu": -1, "dtt": 0.1}, "grid": {"points": 12}, "flow": {"type": "vortex"}})");
  CHECK(v.size() >= 5);
  CHECK(any_contains(v, "'bogus'"));
  CHECK(any_contains(v, "'solver.dtt'"));
  CHECK(any_contains(v, "nu must be > 0"));
  CHECK(any_contains(v, "power of two"));
  CHECK(any_contains(v, "vortex"));
  CHECK(any_contains(violations_of("[1, 2"), "not valid JSON"));
}

TEST_CASE("shear scenarios require a shear flow") {
  CHECK(any_contains(violations_of(R"({"scenario": "shear-suppression"})"), "requires a shear flow"));
  CHECK(any_contains(violations_of(R"({"scenario": "shear-suppression", "flow": {"type": "cellular"}})"),
                     "got cellular"));
  CHECK_NOTHROW(parse_config(R"({"scenario": "enhanced-dissipation-sweep", "flow": {"type": "shear"}})"));
}

TEST_CASE("checkpoint round trip is bit-identical") {
  const fs::path dir = scratch("ckpt");
  const Grid g(2, 16);
  const SpectralField u = random_band_field(g, 5, 2.0, 17);
  save_checkpoint(u, {0.3, 1.25, 0.125}, dir / "u.nlsp");
  CHECK(fs::file_size(dir / "u.nlsp") == kCheckpointHeaderBytes + 16 * g.size());
  const LoadedCheckpoint back = load_checkpoint(dir / "u.nlsp");
  CHECK(back.field.grid() == g);
  CHECK(back.meta.nu == 0.3);
  CHECK(back.meta.p == 1.25);
  CHECK(back.meta.t == 0.125);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back.field.coeffs()[i] == u.coeffs()[i]);
}

TEST_CASE("damaged checkpoints are rejected") {
  const fs::path dir = scratch("ckpt_bad");
  save_checkpoint(random_band_field(Grid(1, 16), 3, 1.0, 1), {}, dir / "u.nlsp");
  std::string bytes = slurp(dir / "u.nlsp");

  std::ofstream(dir / "short.nlsp", std::ios::binary) << bytes.substr(0, bytes.size() - 5);
  CHECK_THROWS_AS(load_checkpoint(dir / "short.nlsp"), CheckpointError);
  std::ofstream(dir / "tiny.nlsp", std::ios::binary) << bytes.substr(0, 10);
  CHECK_THROWS_AS(load_checkpoint(dir / "tiny.nlsp"), CheckpointError);

  std::string versioned = bytes;
  versioned[4] = static_cast<char>(999 & 0xff);
  versioned[5] = static_cast<char>(999 >> 8);
  std::ofstream(dir / "v999.nlsp", std::ios::binary) << versioned;
  try {
    load_checkpoint(dir / "v999.nlsp");
    FAIL("version 999 accepted");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find("unsupported checkpoint version 999") != std::string::npos);
  }

  std::string magic = bytes;
  magic[0] = 'X';
  std::ofstream(dir / "magic.nlsp", std::ios::binary) << magic;
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "magic.nlsp"), doctest::Contains("magic"), CheckpointError);
}

TEST_CASE("zero initial datum gives a zero trajectory") {
  const fs::path dir = scratch("zero");
  const RunConfig c = parse_config(R"({"grid": {"points": 16}, "solver": {"dt": 0.01, "t_end": 0.1},
      "initial_data": {"type": "single_mode", "k": [1, 0], "amplitude": 0}, "output_dir": ")" +
                                   (dir / "out").string() + "\"}");
  const RunOutcome o = run(c);
  CHECK(o.status == "Completed");
  CHECK(o.exit_code == 0);
  const std::string csv = slurp(dir / "out" / "trajectory.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == kTrajectoryHeader);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    while (std::getline(cells, cell, ',')) CHECK(std::stod(cell) == 0.0);
  }
  CHECK(rows == 11);
  CHECK(fs::exists(dir / "out" / "summary.json"));
  CHECK(fs::exists(dir / "out" / "decay.svg"));
}

TEST_CASE("single mode datum is A sin(2 pi k.x)") {
  RunConfig c = parse_config(R"({"grid": {"points": 16}, "initial_data": {"k": [2, 1], "amplitude": 3}})");
  const std::vector<double> x = inverse_transform(make_initial_data(c));
  const Grid g(2, 16);
  for (std::size_t i = 0; i < g.size(); i += 7) {
    const auto [a, b] = g.point(i);
    CHECK(x[i] == doctest::Approx(3.0 * std::sin(kTwoPi * (2 * a + b))).epsilon(1e-12));
  }
  c = parse_config(R"({"grid": {"points": 16}, "initial_data": {"k": [0, 0], "amplitude": 3}})");
  CHECK(make_initial_data(c).mean().real() == 3.0);
}

TEST_CASE("reruns are byte-identical and resuming matches a single run") {
  const fs::path dir = scratch("resume");
  const RunConfig full = parse_config(simulate_config(dir / "full", 0.05));
  run(full);
  const RunConfig again = parse_config(simulate_config(dir / "again", 0.05));
  run(again);
  CHECK(slurp(dir / "full" / "trajectory.csv") == slurp(dir / "again" / "trajectory.csv"));

  const RunConfig cont = parse_config(simulate_config(dir / "cont", 0.05));
  const RunOutcome o = resume(cont, dir / "full" / "checkpoint_000000025.nlsp");
  CHECK(o.status == "Completed");
  const SpectralField a = load_checkpoint(dir / "full" / "final.nlsp").field;
  const LoadedCheckpoint b = load_checkpoint(dir / "cont" / "final.nlsp");
  CHECK(b.meta.t == doctest::Approx(0.05));
  double diff = 0.0;
  for (std::size_t i = 0; i < a.grid().size(); ++i) diff = std::max(diff, std::abs(a.coeffs()[i] - b.field.coeffs()[i]));
  CHECK(diff <= 1e-12);
}

TEST_CASE("resume rejects mismatched metadata") {
  const fs::path dir = scratch("resume_bad");
  save_checkpoint(SpectralField(Grid(2, 16)), {2.0, 1.5, 0.0}, dir / "c.nlsp");
  const RunConfig c = parse_config(simulate_config(dir / "out"));
  CHECK_THROWS_AS(resume(c, dir / "c.nlsp"), ConfigError);
}

TEST_CASE("dissipation-time scenario reports the heat value for zero flow") {
  const fs::path dir = scratch("dtime");
  const RunConfig c = parse_config(R"({"scenario": "dissipation-time", "dissipation": {"truncation": 4},
                                        "output_dir": ")" + (dir / "out").string() + "\"}");
  const RunOutcome o = run(c);
  CHECK(o.metrics.at("tau_star") == doctest::Approx(0.017558).epsilon(1e-4));
  CHECK(fs::exists(dir / "out" / "norm_curve.csv"));
}

TEST_CASE("blow-up scan marks supercritical rows of a concentrated bump") {
  const fs::path dir = scratch("scan");
  const Grid g(2, 32);
  std::vector<double> x(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [a, b] = g.point(i);
    x[i] = std::exp(-((a - 0.5) * (a - 0.5) + (b - 0.5) * (b - 0.5)) / 0.02);
  }
  SpectralField bump = project_mean_zero(forward_transform(g, x));
  save_checkpoint(bump, {}, dir / "bump.nlsp");
  const RunConfig c = parse_config(R"({"scenario": "blowup-scan", "solver": {"dt": 1e-4, "t_end": 0.2},
      "initial_data": {"type": "file", "path": ")" + (dir / "bump.nlsp").string() +
                                   R"("}, "scan": {"amplitudes": [0.5, 2.0]}, "output_dir": ")" +
                                   (dir / "out").string() + "\"}");
  const RunOutcome o = run(c);
  CHECK(o.metrics.at("a_star") == doctest::Approx(blowup_threshold_amplitude(bump, 1.5)));
  CHECK(o.metrics.at("blowup_rows") == 1.0);
  const std::string table = slurp(dir / "out" / "scan.csv");
  std::istringstream lines(table);
  std::string header, sub, super;
  std::getline(lines, header);
  std::getline(lines, sub);
  std::getline(lines, super);
  CHECK(sub.find("Completed") != std::string::npos);
  CHECK(super.find("BlowUp") != std::string::npos);
}

TEST_CASE("sweep keeps input order, duplicates rows and records failures") {
  const fs::path dir = scratch("sweep");
  CHECK(sweep({}, 4).empty());
  const std::string doc = R"({"base": {"grid": {"points": 16}, "solver": {"dt": 0.01, "t_end": 0.05}},
      "runs": [{"solver": {"nu": 1.0}}, {"solver": {"nu": 0.5}}, {"solver": {"nu": 1.0}},
               {"initial_data": {"type": "file", "path": "/nonexistent/x.nlsp"}}]})";
  const std::vector<RunConfig> configs = parse_sweep(doc, (dir / "rows").string());
  REQUIRE(configs.size() == 4);
  CHECK(configs[1].solver.nu == 0.5);
  CHECK(configs[1].output_dir == (dir / "rows" / "run_001").string());
  const auto rows = sweep(configs, 3);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].index == i);
  CHECK(rows[0].metrics == rows[2].metrics);
  CHECK(rows[0].metrics.at("final_norm") != rows[1].metrics.at("final_norm"));
  CHECK(rows[3].status == "Failed");
  CHECK(!rows[3].error.empty());
  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("index,scenario,status,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("unwritable output directory raises an output error") {
  const fs::path dir = scratch("io");
  std::ofstream(dir / "blocker") << "x";
  RunConfig c = parse_config(R"({"grid": {"points": 16}, "solver": {"t_end": 0.01}})");
  c.output_dir = (dir / "blocker" / "sub").string();
  CHECK_THROWS_AS(run(c), OutputError);

  OutputDir out(dir / "ok");
  out.write("a.txt", "a");
  fs::create_directories(dir / "ok" / "b.txt");  // a directory where a file should go
  CHECK_THROWS_AS(out.write("b.txt", "b"), OutputError);
  const std::string manifest = slurp(dir / "ok" / "MANIFEST.partial");
  CHECK(manifest.find("a.txt") != std::string::npos);
  CHECK(manifest.find("failed: b.txt") != std::string::npos);
}

TEST_CASE("seventeen significant digits round-trip doubles") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = dist(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("decay plot is a standalone SVG") {
  const std::string svg = decay_svg({{"a", {{0.0, 1.0}, {1.0, 0.1}, {2.0, 0.0}}}}, "t");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(decay_svg({}, "empty").find("</svg>") != std::string::npos);
}
