#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nlsp/runner.hpp"

namespace nlsp {

using Json = nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "\n  " : "  ") + items[i];
  return out;
}

const char* type_name(const Json& j) { return j.type_name(); }

// Walks one JSON object: typed reads record errors instead of throwing, and
// every key that is never read is reported as unknown.
class Section {
 public:
  Section(const Json& obj, std::string where, std::vector<std::string>& errors)
      : obj_(obj), where_(std::move(where)), errors_(errors) {
    if (!obj_.is_object()) error("must be an object, got " + std::string(type_name(obj_)));
  }
  Section(const Section&) = delete;
  ~Section() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) errors_.push_back("unknown key '" + prefix() + key + "'");
  }

  bool has(const std::string& key) {
    if (!obj_.is_object() || !obj_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }
  const Json& at(const std::string& key) { return obj_.at(key); }
  std::string prefix() const { return where_.empty() ? "" : where_ + "."; }
  void error(const std::string& message) {
    errors_.push_back((where_.empty() ? std::string("config") : where_) + ": " + message);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const Json& v = at(key);
    if (v.is_number()) out = v.get<double>();
    else errors_.push_back("'" + prefix() + key + "' must be a number");
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (!has(key)) return;
    const Json& v = at(key);
    if (v.is_number_integer()) out = v.get<Int>();
    else errors_.push_back("'" + prefix() + key + "' must be an integer");
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const Json& v = at(key);
    if (v.is_boolean()) out = v.get<bool>();
    else errors_.push_back("'" + prefix() + key + "' must be true or false");
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const Json& v = at(key);
    if (v.is_string()) out = v.get<std::string>();
    else errors_.push_back("'" + prefix() + key + "' must be a string");
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const Json& v = at(key);
    if (!v.is_array()) {
      errors_.push_back("'" + prefix() + key + "' must be an array of numbers");
      return;
    }
    out.clear();
    for (const Json& x : v) {
      if (!x.is_number()) {
        errors_.push_back("'" + prefix() + key + "' must contain only numbers");
        return;
      }
      out.push_back(x.get<double>());
    }
  }

 private:
  const Json& obj_;
  std::string where_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FlowSpec parse_flow(const Json& obj, const std::string& where, std::vector<std::string>& errors) {
  Section s(obj, where, errors);
  std::string type = "zero";
  s.string("type", type);
  if (type == "zero") return ZeroFlow{};
  if (type == "shear") {
    double amplitude = 1.0;
    int samples = 64;
    std::string profile = "sine";
    std::vector<double> values;
    int order = 0;
    s.number("amplitude", amplitude);
    s.integer("samples", samples);
    s.integer("critical_order", order);
    if (s.has("profile")) {
      const Json& p = s.at("profile");
      if (p.is_string()) profile = p.get<std::string>();
      else if (p.is_array()) {
        profile = "samples";
        for (const Json& x : p) {
          if (!x.is_number()) {
            s.error("profile samples must be numbers");
            return ZeroFlow{};
          }
          values.push_back(x.get<double>());
        }
      } else {
        s.error("profile must be \"sine\", \"sine_cubed\" or an array of samples");
        return ZeroFlow{};
      }
    }
    if (samples < 8 || (samples & (samples - 1)) != 0) {
      s.error("samples must be a power of two >= 8");
      return ZeroFlow{};
    }
    if (profile == "sine") return ShearFlow::sine(amplitude, samples);
    if (profile == "sine_cubed") return ShearFlow::sine_cubed(amplitude, samples);
    if (profile == "samples") {
      const auto n = values.size();
      if (n < 8 || (n & (n - 1)) != 0) {
        s.error("profile sample count must be a power of two >= 8");
        return ZeroFlow{};
      }
      for (double& v : values) v *= amplitude;
      ShearFlow shear{values, order};
      if (order == 0) {
        try {
          shear.critical_order = shear_critical_order(values);
        } catch (const std::exception& e) {
          s.error(std::string("profile: ") + e.what());
          return ZeroFlow{};
        }
      }
      return shear;
    }
    s.error("unknown shear profile '" + profile + "'");
    return ZeroFlow{};
  }
  if (type == "cellular") {
    double amplitude = 1.0, cell_scale = 1.0;
    s.number("amplitude", amplitude);
    s.number("cell_scale", cell_scale);
    try {
      return make_cellular(amplitude, cell_scale);
    } catch (const std::exception& e) {
      s.error(e.what());
      return ZeroFlow{};
    }
  }
  if (type == "rescaled_mixing") {
    double amplitude = 1.0;
    s.number("amplitude", amplitude);
    FlowSpec base = ZeroFlow{};
    if (s.has("base")) base = parse_flow(s.at("base"), s.prefix() + "base", errors);
    else s.error("rescaled_mixing needs a 'base' flow");
    if (!(amplitude > 0.0)) s.error("amplitude must be > 0");
    return make_rescaled(base, amplitude);
  }
  if (type == "custom") {
    CustomFlow c;
    s.integer("points", c.points_per_axis);
    s.numbers("v1", c.v1);
    s.numbers("v2", c.v2);
    const std::size_t n = static_cast<std::size_t>(c.points_per_axis) * c.points_per_axis;
    if (c.points_per_axis < 8 || c.v1.size() != n || c.v2.size() != n)
      s.error("custom flow needs points >= 8 and v1, v2 with points^2 samples each");
    return c;
  }
  s.error("unknown flow type '" + type + "' (zero, shear, cellular, rescaled_mixing, custom)");
  return ZeroFlow{};
}

void parse_initial(const Json& obj, InitialDataSpec& spec, std::vector<std::string>& errors) {
  Section s(obj, "initial_data", errors);
  std::string type = "single_mode";
  s.string("type", type);
  if (type == "single_mode") {
    spec.kind = InitialDataSpec::Kind::SingleMode;
    if (s.has("k")) {
      const Json& k = s.at("k");
      if (k.is_array() && (k.size() == 1 || k.size() == 2) && k[0].is_number_integer() &&
          (k.size() == 1 || k[1].is_number_integer())) {
        spec.k = {k[0].get<int>(), k.size() == 2 ? k[1].get<int>() : 0};
      } else {
        s.error("k must be an array of one or two integers");
      }
    }
    s.number("amplitude", spec.amplitude);
  } else if (type == "random_band") {
    spec.kind = InitialDataSpec::Kind::RandomBand;
    s.integer("k_max", spec.k_max);
    s.number("amplitude", spec.amplitude);
    if (s.has("seed")) {
      if (s.at("seed").is_number_unsigned()) {
        spec.seed = s.at("seed").get<std::uint64_t>();
        spec.seed_given = true;
      } else {
        s.error("seed must be a nonnegative integer");
      }
    }
    if (spec.k_max < 1) s.error("k_max must be >= 1");
  } else if (type == "file") {
    spec.kind = InitialDataSpec::Kind::File;
    s.string("path", spec.path);
    if (spec.path.empty()) s.error("file initial data needs a 'path'");
  } else {
    s.error("unknown initial data type '" + type + "' (single_mode, random_band, file)");
  }
}

bool parse_scenario(const std::string& name, ScenarioKind& out) {
  for (ScenarioKind k : {ScenarioKind::Simulate, ScenarioKind::DissipationTime, ScenarioKind::BlowupScan,
                         ScenarioKind::EnhancedDissipationSweep, ScenarioKind::ShearSuppression}) {
    if (scenario_name(k) == name) {
      out = k;
      return true;
    }
  }
  return false;
}

RunConfig parse_document(const Json& doc) {
  std::vector<std::string> errors;
  RunConfig cfg;
  {
    Section root(doc, "", errors);
    std::string scenario = "simulate";
    root.string("scenario", scenario);
    if (!parse_scenario(scenario, cfg.scenario))
      root.error("unknown scenario '" + scenario +
                 "' (simulate, dissipation-time, blowup-scan, enhanced-dissipation-sweep, shear-suppression)");

    if (root.has("grid")) {
      Section g(root.at("grid"), "grid", errors);
      g.integer("dim", cfg.dim);
      g.integer("points", cfg.points);
    }
    SolverConfig& sc = cfg.solver;
    if (root.has("solver")) {
      Section s(root.at("solver"), "solver", errors);
      s.number("nu", sc.nu);
      s.number("p", sc.p);
      s.number("dt", sc.dt);
      s.number("t_end", sc.t_end);
      s.number("blowup_threshold", sc.blowup_threshold);
      s.number("dealias_fraction", sc.dealias_fraction);
      s.boolean("enforce_mean_zero", sc.enforce_mean_zero);
      s.boolean("nonlinear", sc.nonlinear);
      s.number("growth_guard", sc.growth_guard);
      s.integer("max_dt_halvings", sc.max_dt_halvings);
      std::string scheme = "etd1", form = "standard";
      s.string("scheme", scheme);
      s.string("form", form);
      if (scheme == "etd1") sc.scheme = Scheme::Etd1;
      else if (scheme == "etdrk2") sc.scheme = Scheme::Etdrk2;
      else s.error("scheme must be \"etd1\" or \"etdrk2\"");
      if (form == "standard") sc.form = EquationForm::Standard;
      else if (form == "shear") sc.form = EquationForm::Shear;
      else s.error("form must be \"standard\" or \"shear\"");
    }
    if (root.has("flow")) {
      cfg.flow_given = true;
      sc.flow = parse_flow(root.at("flow"), "flow", errors);
    }
    if (root.has("initial_data")) parse_initial(root.at("initial_data"), cfg.initial, errors);
    root.string("output_dir", cfg.output_dir);
    root.integer("sample_every", cfg.sample_every);
    root.integer("checkpoint_every", cfg.checkpoint_every);
    if (root.has("seed")) {
      if (root.at("seed").is_number_unsigned()) cfg.seed = root.at("seed").get<std::uint64_t>();
      else root.error("seed must be a nonnegative integer");
    }
    if (root.has("dissipation")) {
      Section d(root.at("dissipation"), "dissipation", errors);
      d.integer("truncation", cfg.dissipation.truncation);
      d.number("tol", cfg.dissipation.tol);
      d.boolean("check_truncation", cfg.dissipation.check_truncation);
      d.integer("curve_points", cfg.dissipation.curve_points);
      if (cfg.dissipation.truncation < 1) d.error("truncation must be >= 1");
      if (!(cfg.dissipation.tol > 0.0)) d.error("tol must be > 0");
    }
    if (root.has("scan")) {
      Section d(root.at("scan"), "scan", errors);
      d.numbers("amplitudes", cfg.scan.amplitudes);
      d.boolean("relative", cfg.scan.relative);
    }
    if (root.has("enhanced")) {
      Section d(root.at("enhanced"), "enhanced", errors);
      d.numbers("nus", cfg.enhanced.nus);
      d.integer("k2_max", cfg.enhanced.k2_max);
      d.integer("k1_max", cfg.enhanced.k1_max);
      d.number("min_decades", cfg.enhanced.min_decades);
      for (double nu : cfg.enhanced.nus)
        if (!(nu > 0.0)) d.error("nus must all be > 0");
    }
    if (root.has("shear_suppression")) {
      Section d(root.at("shear_suppression"), "shear_suppression", errors);
      d.number("mean_fraction", cfg.shear.mean_fraction);
      d.number("perp_norm", cfg.shear.perp_norm);
      d.integer("gn_samples", cfg.shear.gn_samples);
      d.number("horizon_rates", cfg.shear.horizon_rates);
    }
  }

  if (cfg.sample_every < 1) errors.push_back("sample_every must be >= 1");
  if (cfg.checkpoint_every < 0) errors.push_back("checkpoint_every must be >= 0");
  if (!cfg.initial.seed_given) cfg.initial.seed = cfg.seed;

  bool grid_ok = true;
  try {
    Grid(cfg.dim, cfg.points);
  } catch (const std::exception& e) {
    errors.push_back(std::string("grid: ") + e.what());
    grid_ok = false;
  }
  {
    // With a bad grid, check the solver against the smallest grid of a valid dimension.
    const Grid probe = grid_ok ? Grid(cfg.dim, cfg.points) : Grid(cfg.dim == 1 ? 1 : 2, 8);
    try {
      validate(cfg.solver, probe);
    } catch (const std::invalid_argument& e) {
      std::string msg = e.what();
      const std::string prefix = "invalid solver config: ";
      if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
      std::size_t start = 0;
      while (start <= msg.size()) {
        const std::size_t end = msg.find("; ", start);
        errors.push_back("solver: " + msg.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 2;
      }
    }
  }

  const bool needs_shear =
      cfg.scenario == ScenarioKind::ShearSuppression || cfg.scenario == ScenarioKind::EnhancedDissipationSweep;
  if (needs_shear) {
    if (!cfg.flow_given) errors.push_back("flow: " + scenario_name(cfg.scenario) + " requires a shear flow");
    else if (!std::holds_alternative<ShearFlow>(cfg.solver.flow.variant))
      errors.push_back("flow: " + scenario_name(cfg.scenario) + " requires a shear flow, got " +
                       cfg.solver.flow.name());
    if (cfg.dim != 2) errors.push_back("grid: " + scenario_name(cfg.scenario) + " requires dim = 2");
  }
  if (cfg.scenario == ScenarioKind::EnhancedDissipationSweep && cfg.enhanced.nus.empty())
    errors.push_back("enhanced: nus must not be empty");
  if (cfg.scenario == ScenarioKind::BlowupScan && cfg.scan.amplitudes.empty())
    errors.push_back("scan: amplitudes must not be empty");
  if (cfg.scenario == ScenarioKind::DissipationTime && cfg.dim != 2)
    errors.push_back("grid: dissipation-time requires dim = 2");

  if (!errors.empty()) throw ConfigError(std::move(errors));
  cfg.hash = fnv1a_hex(doc.dump());
  return cfg;
}

}  // namespace

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Simulate: return "simulate";
    case ScenarioKind::DissipationTime: return "dissipation-time";
    case ScenarioKind::BlowupScan: return "blowup-scan";
    case ScenarioKind::EnhancedDissipationSweep: return "enhanced-dissipation-sweep";
    case ScenarioKind::ShearSuppression: return "shear-suppression";
  }
  return "unknown";
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::invalid_argument("invalid config:\n" + join(violations)), violations_(std::move(violations)) {}

RunConfig parse_config(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  return parse_document(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<RunConfig> parse_sweep(std::string_view text, const std::string& out_root) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array())
    throw ConfigError({"sweep document needs a 'runs' array"});
  for (const auto& [key, value] : doc.items())
    if (key != "base" && key != "runs") throw ConfigError({"unknown key '" + key + "' in sweep document"});
  const Json base = doc.value("base", Json::object());
  std::vector<RunConfig> out;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < doc["runs"].size(); ++i) {
    Json merged = base;
    merged.merge_patch(doc["runs"][i]);
    if (!merged.contains("output_dir") || !doc["runs"][i].contains("output_dir")) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", i);
      merged["output_dir"] = (std::filesystem::path(out_root) / name).string();
    }
    try {
      out.push_back(parse_document(merged));
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations()) errors.push_back("runs[" + std::to_string(i) + "]: " + v);
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return out;
}

}  // namespace nlsp
