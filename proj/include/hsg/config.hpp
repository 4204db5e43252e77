#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hsg/errors.hpp"
#include "hsg/format.hpp"
#include "hsg/io.hpp"
#include "hsg/models/glmm.hpp"
#include "hsg/models/smn.hpp"
#include "hsg/models/student_t.hpp"
#include "hsg/models/toy_laplace.hpp"
#include "hsg/scans.hpp"

namespace hsg {

using KeyValues = std::map<std::string, std::string>;

struct RunSection {
  std::size_t iterations = 10000;
  double burn_in_fraction = 0.5;
  std::uint64_t seed = 1;
  std::size_t n_parallel_chains = 1;
};

struct OutputSection {
  fs::path directory = "out";
  std::string format = "csv";
};

struct CompareSection {
  std::size_t k_max = 30;
};

/// Parsed configuration. The model section is kept as raw key/value pairs
/// (its meaning depends on `model_kind`) and is turned into a model by
/// build_model.
struct RunConfig {
  std::string model_kind;
  KeyValues model;
  ScanSpec scan;
  RunSection run;
  OutputSection output;
  CompareSection compare;
  fs::path base_dir = ".";
  std::string source = "<config>";
};

// ---------------------------------------------------------------------------
// Presets

inline const std::map<std::string, std::string>& preset_texts() {
  static const std::map<std::string, std::string> presets = {
      {"table1-setting1",
       "[model]\nkind = glmm\nsetting = 1\ndata_seed = 101\n[scan]\nkind = HS\nr = 0.5\n"
       "[run]\niterations = 60000\nseed = 1\n"},
      {"table1-setting2",
       "[model]\nkind = glmm\nsetting = 2\ndata_seed = 102\n[scan]\nkind = HS\nr = 0.5\n"
       "[run]\niterations = 60000\nseed = 1\n"},
      {"table1-setting3",
       "[model]\nkind = glmm\nsetting = 3\ndata_seed = 103\n[scan]\nkind = HS\nr = 0.5\n"
       "[run]\niterations = 60000\nseed = 1\n"},
      {"toy-t",
       "[model]\nkind = student_t\nw = -1.2, 0.3, 0.8, 2.1, -0.4\nnu = 4\nprior = flat\n"
       "[scan]\nkind = HS\nr = 0.5\n[run]\niterations = 100000\nseed = 1\n"},
      {"toy-laplace",
       "[model]\nkind = toy_laplace\n[scan]\nkind = DA\nmove = false\n[run]\niterations = 1000000\nseed = 1\n"},
      {"smn",
       "[model]\nkind = smn\nn = 40\np = 3\ndata_seed = 7\nmixing = student_t\nnu = 4\nalpha = 2\ngamma = 1\n"
       "prior_var = 100\n[scan]\nkind = HS\nr = 0.5\n[run]\niterations = 20000\nseed = 1\n"},
  };
  return presets;
}

inline std::string preset_names() {
  std::string out;
  for (const auto& [name, text] : preset_texts()) out += (out.empty() ? "" : ", ") + name;
  return out;
}

// ---------------------------------------------------------------------------
// Value parsing

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline double config_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(trim(v));
  } catch (const IoError&) {
    throw ConfigError("'" + key + "' must be a number, got '" + v + "'");
  }
}

inline std::uint64_t config_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError("'" + key + "' must be a non-negative integer, got '" + v + "'");
  return out;
}

inline bool config_bool(const std::string& key, const std::string& v) {
  const std::string t = lower(trim(v));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("'" + key + "' must be true or false, got '" + v + "'");
}

inline std::vector<double> config_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(config_double(key, item));
  if (out.empty()) throw ConfigError("'" + key + "' must be a non-empty comma-separated list");
  return out;
}

inline void reject_unknown(const std::string& section, const KeyValues& kv, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : kv)
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in [" + section + "]");
}

}  // namespace detail

inline ScanSpec parse_scan_section(const KeyValues& kv) {
  detail::reject_unknown("scan", kv, {"kind", "r", "r1", "r2", "r3", "use_r1", "use_r2", "move", "s_choice"});
  ScanSpec s;
  const auto kind_it = kv.find("kind");
  if (kind_it == kv.end()) throw ConfigError("[scan] needs 'kind' (DA, SS, RS, HS or HSS)");
  const std::string kind = detail::trim(kind_it->second);
  if (kind == "DA") s.kind = ScanKind::DA;
  else if (kind == "SS") s.kind = ScanKind::SS;
  else if (kind == "RS") s.kind = ScanKind::RS;
  else if (kind == "HS") s.kind = ScanKind::HS;
  else if (kind == "HSS") s.kind = ScanKind::HSS;
  else throw ConfigError("unknown scan kind '" + kind + "' (expected DA, SS, RS, HS or HSS)");
  for (const auto& [k, v] : kv) {
    if (k == "r") s.r = detail::config_double(k, v);
    else if (k == "r1") s.r1 = detail::config_double(k, v);
    else if (k == "r2") s.r2 = detail::config_double(k, v);
    else if (k == "r3") s.r3 = detail::config_double(k, v);
    else if (k == "use_r1") s.use_r1 = detail::config_bool(k, v);
    else if (k == "use_r2") s.use_r2 = detail::config_bool(k, v);
    else if (k == "move") s.da_move = detail::config_bool(k, v);
    else if (k == "s_choice") {
      const std::string c = detail::lower(detail::trim(v));
      if (c == "mode") s.s_choice = SChoice::ModeMatch;
      else if (c == "midpoint") s.s_choice = SChoice::Midpoint;
      else if (c == "grid") s.s_choice = SChoice::GridSearch;
      else throw ConfigError("s_choice must be 'mode', 'midpoint' or 'grid'");
    }
  }
  s.validate();
  return s;
}

/// Parses INI text with [model], [scan], [run], [output] and optional
/// [compare] sections. Relative data paths resolve against `base_dir`.
inline RunConfig parse_config(const std::string& text, const fs::path& base_dir = ".",
                              const std::string& source = "<config>") {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  std::map<std::string, KeyValues> sections;
  for (const auto& [name, section] : tree) {
    if (!section.data().empty() && section.empty())
      throw ConfigError(source + ": key '" + name + "' outside of any section");
    static const std::set<std::string> known{"model", "scan", "run", "output", "compare"};
    if (!known.count(name)) throw ConfigError(source + ": unknown section [" + name + "]");
    for (const auto& [k, v] : section) sections[name][k] = detail::trim(v.data());
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.source = source;
  cfg.model = sections["model"];
  const auto kind = cfg.model.find("kind");
  if (kind == cfg.model.end()) throw ConfigError(source + ": [model] needs 'kind' (glmm, student_t, smn, toy_laplace)");
  cfg.model_kind = kind->second;
  cfg.model.erase(kind);
  if (!sections.count("scan")) throw ConfigError(source + ": missing [scan] section");
  cfg.scan = parse_scan_section(sections["scan"]);

  const KeyValues& run = sections["run"];
  detail::reject_unknown("run", run, {"iterations", "burn_in_fraction", "seed", "n_parallel_chains"});
  for (const auto& [k, v] : run) {
    if (k == "iterations") cfg.run.iterations = detail::config_u64(k, v);
    else if (k == "burn_in_fraction") cfg.run.burn_in_fraction = detail::config_double(k, v);
    else if (k == "seed") cfg.run.seed = detail::config_u64(k, v);
    else if (k == "n_parallel_chains") cfg.run.n_parallel_chains = detail::config_u64(k, v);
  }
  if (cfg.run.iterations < 1) throw ConfigError("[run] iterations must be >= 1");
  if (!(cfg.run.burn_in_fraction >= 0.0 && cfg.run.burn_in_fraction < 1.0))
    throw ConfigError("[run] burn_in_fraction must lie in [0, 1)");
  if (cfg.run.n_parallel_chains < 1 || cfg.run.n_parallel_chains > 256)
    throw ConfigError("[run] n_parallel_chains must lie in [1, 256]");

  const KeyValues& out = sections["output"];
  detail::reject_unknown("output", out, {"directory", "format"});
  if (auto it = out.find("directory"); it != out.end()) cfg.output.directory = it->second;
  if (auto it = out.find("format"); it != out.end()) cfg.output.format = it->second;
  if (cfg.output.format != "csv" && cfg.output.format != "json")
    throw ConfigError("[output] format must be csv or json");

  const KeyValues& cmp = sections["compare"];
  detail::reject_unknown("compare", cmp, {"k_max"});
  if (auto it = cmp.find("k_max"); it != cmp.end()) cfg.compare.k_max = detail::config_u64("k_max", it->second);
  if (cfg.compare.k_max < 1) throw ConfigError("[compare] k_max must be >= 1");
  return cfg;
}

inline RunConfig load_config(const fs::path& path) {
  return parse_config(read_text(path), path.parent_path().empty() ? fs::path(".") : path.parent_path(),
                      path.string());
}

inline RunConfig preset_config(const std::string& name) {
  const auto& p = preset_texts();
  auto it = p.find(name);
  if (it == p.end()) throw ConfigError("unknown preset '" + name + "'; available presets: " + preset_names());
  return parse_config(it->second, ".", "preset " + name);
}

// ---------------------------------------------------------------------------
// Models

using AnyModel = std::variant<StudentTModel, GlmmModel, SmnModel, ToyLaplaceModel>;

/// Data set and truth behind a GLMM reference setting, regenerated from its seed.
struct GlmmDataset {
  GlmmDesign design;
  GlmmSimulation sim;
  int setting = 0;
  std::uint64_t data_seed = 0;
};

inline GlmmDataset simulate_setting(int setting, std::uint64_t data_seed) {
  GlmmDataset d;
  d.setting = setting;
  d.data_seed = data_seed;
  RngStream rng(data_seed, 0);
  d.design = table1_design(setting, rng);
  d.sim = simulate_glmm_bottom_up(d.design, rng);
  return d;
}

namespace detail {

class ModelKeys {
 public:
  ModelKeys(const KeyValues& kv, std::string kind) : kv_(kv), kind_(std::move(kind)) {}

  bool has(const std::string& k) const { return kv_.count(k) > 0; }
  const std::string& raw(const std::string& k) {
    used_.insert(k);
    auto it = kv_.find(k);
    if (it == kv_.end()) throw ConfigError("[model] kind = " + kind_ + " needs '" + k + "'");
    return it->second;
  }
  double num(const std::string& k) { return config_double(k, raw(k)); }
  double num(const std::string& k, double dflt) { return has(k) ? num(k) : dflt; }
  std::uint64_t u64(const std::string& k, std::uint64_t dflt) { return has(k) ? config_u64(k, raw(k)) : dflt; }
  std::vector<double> list(const std::string& k) { return config_list(k, raw(k)); }
  std::string str(const std::string& k, const std::string& dflt) { return has(k) ? trim(raw(k)) : dflt; }

  void finish() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "' in [model] for kind = " + kind_);
  }

 private:
  const KeyValues& kv_;
  std::string kind_;
  std::set<std::string> used_;
};

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline GlmmModel build_glmm(ModelKeys& keys, const fs::path& base) {
  Vector y;
  Matrix x;
  std::vector<Matrix> blocks;
  GlmmHyper hyper;
  if (keys.has("setting")) {
    const auto setting = keys.u64("setting", 1);
    if (setting < 1 || setting > 3) throw ConfigError("setting must be 1, 2 or 3");
    const GlmmDataset d = simulate_setting(static_cast<int>(setting), keys.u64("data_seed", 1));
    y = d.sim.y;
    x = d.design.x;
    blocks = d.design.z_blocks;
    hyper = d.design.hyper;
  } else {
    y = read_vector_csv(base / keys.raw("y"));
    x = read_matrix_csv(base / keys.raw("x"));
    const Matrix z = read_matrix_csv(base / keys.raw("z"));
    std::vector<double> widths = keys.has("z_blocks") ? keys.list("z_blocks") : std::vector<double>{double(z.cols())};
    Eigen::Index start = 0;
    for (double w : widths) {
      if (!(w >= 1.0) || w != std::floor(w)) throw ConfigError("z_blocks entries must be positive integers");
      const auto cols = static_cast<Eigen::Index>(w);
      if (start + cols > z.cols()) throw ConfigError("z_blocks widths exceed the columns of Z");
      blocks.push_back(z.middleCols(start, cols));
      start += cols;
    }
    if (start != z.cols()) throw ConfigError("z_blocks widths must add up to the columns of Z");
    hyper.a.assign(blocks.size() + 1, 1.0);
    hyper.b.assign(blocks.size() + 1, 1.0);
  }
  if (keys.has("a")) hyper.a = keys.list("a");
  if (keys.has("b")) hyper.b = keys.list("b");
  if (keys.has("a0")) hyper.a.at(0) = keys.num("a0");
  if (keys.has("b0")) hyper.b.at(0) = keys.num("b0");
  hyper.c = keys.num("c", hyper.c);
  hyper.d = keys.num("d", hyper.d);
  keys.u64("data_seed", 0);
  keys.finish();
  return GlmmModel(std::move(y), std::move(x), std::move(blocks), std::move(hyper));
}

inline StudentTModel build_student_t(ModelKeys& keys, const fs::path& base) {
  Vector w = keys.has("w") ? to_vector(keys.list("w")) : read_vector_csv(base / keys.raw("data"));
  const double nu = keys.num("nu");
  const std::string prior = keys.str("prior", "flat");
  StudentTPrior pr;
  if (prior == "flat") {
    pr = FlatPrior{};
  } else if (prior == "normal") {
    pr = NormalMeanPrior{keys.num("gamma", 0.0)};
  } else {
    throw ConfigError("prior must be 'flat' or 'normal'");
  }
  keys.finish();
  return StudentTModel(std::move(w), nu, pr);
}

inline SmnModel build_smn(ModelKeys& keys, const fs::path& base) {
  Vector y;
  Matrix x;
  const std::string mixing_name = keys.str("mixing", "student_t");
  MixingDensity mixing;
  if (mixing_name == "student_t") mixing = StudentTMixing{keys.num("nu")};
  else if (mixing_name == "inv_gamma") mixing = InvGammaMixing{keys.num("mixing_alpha")};
  else throw ConfigError("mixing must be 'student_t' or 'inv_gamma'");
  if (keys.has("y")) {
    y = read_vector_csv(base / keys.raw("y"));
    x = read_matrix_csv(base / keys.raw("x"));
  } else {
    const auto n = static_cast<Eigen::Index>(keys.u64("n", 40));
    const auto p = static_cast<Eigen::Index>(keys.u64("p", 3));
    if (n < 2 || p < 1 || n > 100000 || p > 1000) throw ConfigError("simulated SMN data needs 2 <= n, 1 <= p");
    RngStream rng(keys.u64("data_seed", 1), 0);
    x.resize(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = j == 0 ? 1.0 : rng.normal();
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double mean = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) mean += x(i, j) * (j == 0 ? 1.0 : 0.5);
      const double z = std::holds_alternative<StudentTMixing>(mixing)
                           ? GammaLaw{0.5 * std::get<StudentTMixing>(mixing).nu, 0.5 * std::get<StudentTMixing>(mixing).nu}.sample(rng)
                           : InvGammaLaw{std::get<InvGammaMixing>(mixing).alpha, 1.0}.sample(rng);
      y(i) = mean + rng.normal() / std::sqrt(z);
    }
  }
  const Eigen::Index p = x.cols();
  Vector prior_mean = keys.has("prior_mean") ? to_vector(keys.list("prior_mean")) : Vector::Zero(p);
  const double prior_var = keys.num("prior_var", 100.0);
  if (!(prior_var > 0.0) || !std::isfinite(prior_var)) throw ConfigError("prior_var must be positive");
  Matrix prior_cov = prior_var * Matrix::Identity(p, p);
  const double alpha = keys.num("alpha");
  const double gamma = keys.num("gamma");
  keys.finish();
  return SmnModel(std::move(y), std::move(x), std::move(prior_mean), std::move(prior_cov), alpha, gamma, mixing);
}

}  // namespace detail

/// Builds and validates the model described by the [model] section.
/// Precondition and domain failures are reported as configuration errors.
inline AnyModel build_model(const RunConfig& cfg) {
  detail::ModelKeys keys(cfg.model, cfg.model_kind);
  try {
    if (cfg.model_kind == "glmm") return detail::build_glmm(keys, cfg.base_dir);
    if (cfg.model_kind == "student_t") return detail::build_student_t(keys, cfg.base_dir);
    if (cfg.model_kind == "smn") return detail::build_smn(keys, cfg.base_dir);
    if (cfg.model_kind == "toy_laplace") {
      keys.finish();
      return ToyLaplaceModel{};
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  throw ConfigError("unknown model kind '" + cfg.model_kind + "' (expected glmm, student_t, smn or toy_laplace)");
}

/// Checks that the scan can run on the model; throws ConfigError otherwise.
inline void validate_scan_for(const AnyModel& model, const ScanSpec& scan) {
  scan.validate();
  std::visit([&](const auto& m) { Kernel<std::decay_t<decltype(m)>>::check_scan(m, scan); }, model);
}

/// Full validation: model, scan-model compatibility and run section.
inline AnyModel validate_config(const RunConfig& cfg) {
  AnyModel model = build_model(cfg);
  validate_scan_for(model, cfg.scan);
  return model;
}

}  // namespace hsg
