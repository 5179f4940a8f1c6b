#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlsp/checkpoint.hpp"
#include "nlsp/report.hpp"
#include "nlsp/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOutput = 1;

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nlsp::ConfigError({"cannot read config file " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Applies the subcommand's scenario and command-line overrides to the document.
nlsp::RunConfig load(const Common& c, const std::string& scenario) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(c.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw nlsp::ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw nlsp::ConfigError({"config must be a JSON object"});
  if (doc.contains("scenario") && doc["scenario"] != scenario)
    throw nlsp::ConfigError({"config scenario '" + doc["scenario"].dump() + "' does not match subcommand '" +
                             scenario + "'"});
  doc["scenario"] = scenario;
  if (!c.out.empty()) doc["output_dir"] = c.out;
  if (c.seed_given) doc["seed"] = c.seed;
  return nlsp::parse_config(doc.dump());
}

void report(const nlsp::RunConfig& cfg, const nlsp::RunOutcome& o) {
  std::printf("%s: %s -> %s/summary.json\n", nlsp::scenario_name(cfg.scenario).c_str(), o.status.c_str(),
              cfg.output_dir.c_str());
  for (const auto& [k, v] : o.metrics) std::printf("  %s = %.10g\n", k.c_str(), v);
  if (!o.error.empty()) std::fprintf(stderr, "error: %s\n", o.error.c_str());
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "Output directory (overrides output_dir)");
  app->add_option("--seed", c.seed, "Seed for random data (overrides seed)");
  app->add_option("--threads", c.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral solver and diagnostics for advected nonlocal semilinear heat equations"};
  app.require_subcommand(1);
  Common common;
  std::string checkpoint;

  const std::vector<std::pair<std::string, std::string>> scenarios{
      {"simulate", "Integrate one initial datum and write its trajectory"},
      {"dissipation-time", "Dissipation time of the flow on a truncated Fourier basis"},
      {"blowup-scan", "Scan amplitudes of an initial shape for blow-up"},
      {"enhanced-dissipation", "Decay rates of a shear flow over a list of viscosities"},
      {"shear-suppression", "Shear-form run with bootstrap and mean-part monitors"},
  };
  for (const auto& [name, help] : scenarios) add_common(app.add_subcommand(name, help), common);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a list of configs, one output directory per run");
  add_common(sweep_cmd, common);
  CLI::App* resume_cmd = app.add_subcommand("resume", "Continue a simulate run from a checkpoint");
  add_common(resume_cmd, common);
  resume_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  common.seed_given = app.get_subcommands().front()->count("--seed") > 0;

  try {
    if (sweep_cmd->parsed()) {
      const std::string root = common.out.empty() ? "nlsp_sweep" : common.out;
      std::vector<nlsp::RunConfig> configs = nlsp::parse_sweep(read_file(common.config), root);
      if (common.seed_given)
        for (auto& c : configs) {
          c.seed = common.seed;
          if (!c.initial.seed_given) c.initial.seed = common.seed;
        }
      const auto rows = nlsp::sweep(configs, common.threads);
      nlsp::OutputDir out(root);
      out.write("sweep.csv", nlsp::sweep_csv(rows));
      int failed = 0;
      for (const auto& r : rows) failed += r.status == "Failed";
      std::printf("sweep: %zu runs, %d failed -> %s/sweep.csv\n", rows.size(), failed, root.c_str());
      return 0;
    }
    if (resume_cmd->parsed()) {
      const nlsp::RunConfig cfg = load(common, "simulate");
      const nlsp::RunOutcome o = nlsp::resume(cfg, checkpoint);
      report(cfg, o);
      return o.exit_code;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const std::string scenario = name == "enhanced-dissipation" ? "enhanced-dissipation-sweep" : name;
    const nlsp::RunConfig cfg = load(common, scenario);
    const nlsp::RunOutcome o = nlsp::run(cfg);
    report(cfg, o);
    return o.exit_code;
  } catch (const nlsp::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const nlsp::OutputError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitOutput;
  } catch (const nlsp::CheckpointError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}
