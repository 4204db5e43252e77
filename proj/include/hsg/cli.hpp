#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hsg/config.hpp"
#include "hsg/diagnostics.hpp"
#include "hsg/ergodicity.hpp"
#include "hsg/io.hpp"

namespace hsg {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

/// Options shared by the subcommands, already parsed from the command line.
struct CliOptions {
  std::vector<fs::path> configs;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<std::string> format;
  std::optional<fs::path> chain_dir;
};

inline RunConfig resolve_config(const CliOptions& opt, std::size_t index = 0) {
  if (opt.preset && !opt.configs.empty()) throw ConfigError("give either --config or --preset, not both");
  RunConfig cfg;
  if (opt.preset) cfg = preset_config(*opt.preset);
  else if (index < opt.configs.size()) cfg = load_config(opt.configs[index]);
  else throw ConfigError("no configuration given; use --config PATH or --preset NAME (" + preset_names() + ")");
  if (opt.seed) cfg.run.seed = *opt.seed;
  if (opt.out) cfg.output.directory = *opt.out;
  if (opt.format) {
    if (*opt.format != "csv" && *opt.format != "json") throw ConfigError("--format must be csv or json");
    cfg.output.format = *opt.format;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// simulate

/// Writes y.csv, X.csv, Z.csv and truth.json for a GLMM reference setting.
inline int cmd_simulate(RunConfig cfg, const CliOptions& opt, std::ostream& os) {
  if (cfg.model_kind != "glmm" || !cfg.model.count("setting"))
    throw ConfigError("simulate needs a GLMM configuration with 'setting' (presets: table1-setting1/2/3)");
  if (opt.seed) cfg.model["data_seed"] = std::to_string(*opt.seed);
  validate_config(cfg);
  const auto setting = detail::config_u64("setting", cfg.model.at("setting"));
  const std::uint64_t data_seed =
      cfg.model.count("data_seed") ? detail::config_u64("data_seed", cfg.model.at("data_seed")) : 1;
  const GlmmDataset d = simulate_setting(static_cast<int>(setting), data_seed);
  const fs::path dir = cfg.output.directory;
  ensure_directory(dir);
  Matrix z(d.design.x.rows(), 0);
  for (const Matrix& b : d.design.z_blocks) {
    Matrix next(z.rows(), z.cols() + b.cols());
    next << z, b;
    z = next;
  }
  write_text(dir / "y.csv", csv_string({"y"}, Matrix(d.sim.y)));
  write_text(dir / "X.csv", csv_string(numbered_names("x", d.design.x.cols()), d.design.x));
  write_text(dir / "Z.csv", csv_string(numbered_names("z", z.cols()), z));
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  const GlmmHyper& h = d.design.hyper;
  nlohmann::json truth = {{"setting", d.setting},
                          {"data_seed", d.data_seed},
                          {"n", d.design.x.rows()},
                          {"p", d.design.x.cols()},
                          {"q", z.cols()},
                          {"hyper", {{"a", h.a}, {"b", h.b}, {"c", h.c}, {"d", h.d}}},
                          {"tau", vec(d.sim.truth.tau)},
                          {"lambda", vec(d.sim.truth.lambda)},
                          {"beta", vec(d.sim.truth.beta)},
                          {"u", vec(d.sim.truth.u)}};
  write_text(dir / "truth.json", truth.dump(2) + "\n");
  os << "wrote y.csv, X.csv, Z.csv, truth.json to " << dir.string() << " (N=" << d.design.x.rows()
     << ", p=" << d.design.x.cols() << ", a0=" << format_double(h.a[0]) << ", b0=" << format_double(h.b[0]) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run

struct ParamSummary {
  std::string name;
  double mean;
  double sd;
  double mcse;  // batch-means standard error, NaN for short chains
  double ess;
};

inline std::vector<ParamSummary> summarize_chain(const Chain& chain) {
  std::vector<ParamSummary> out;
  for (std::size_t j = 0; j < chain.param_names.size(); ++j) {
    const Vector x = chain.kept(static_cast<Eigen::Index>(j));
    ParamSummary s{chain.param_names[j], NAN, NAN, NAN, NAN};
    if (x.size() >= 1) s.mean = sample_mean(x);
    if (x.size() >= 2) s.sd = std::sqrt(sample_variance(x));
    if (x.size() >= 100 && s.sd > 0.0) {
      s.mcse = batch_means_se(x);
      s.ess = effective_sample_size(x);
    }
    out.push_back(s);
  }
  return out;
}

inline std::string summary_text(const Chain& chain) {
  std::ostringstream os;
  os << "chain " << chain.meta.chain_index << ": " << chain.meta.model << " " << chain.meta.scan_detail << ", "
     << chain.meta.iterations << " iterations (burn-in " << chain.meta.burn_in << "), "
     << chain.meta.updates_per_iteration << " updates/iteration";
  if (chain.meta.counters.group_move_trials > 0)
    os << ", group-move acceptance " << format_double(chain.meta.counters.group_move_acceptance());
  if (chain.meta.aborted) os << ", ABORTED: " << chain.meta.abort_reason;
  os << "\n";
  const auto rows = summarize_chain(chain);
  const std::size_t shown = std::min<std::size_t>(rows.size(), 12);
  for (std::size_t i = 0; i < shown; ++i)
    os << "  " << rows[i].name << ": mean " << format_double(rows[i].mean) << ", sd " << format_double(rows[i].sd)
       << ", mcse " << format_double(rows[i].mcse) << ", ess " << format_double(std::round(rows[i].ess)) << "\n";
  if (shown < rows.size()) os << "  (" << rows.size() - shown << " more parameters in diagnose output)\n";
  return os.str();
}

inline std::vector<Chain> run_model_chains(const AnyModel& model, const ScanSpec& scan, const RunSection& run,
                                           bool keep_partial) {
  RunOptions ro;
  ro.burn_in_fraction = run.burn_in_fraction;
  ro.keep_partial = keep_partial;
  return std::visit(
      [&](const auto& m) { return run_chains(m, scan, run.iterations, run.seed, run.n_parallel_chains, ro); }, model);
}

/// Runs the configured chains and writes chain.csv and meta.json (chain_<i>.csv
/// and meta_<i>.json when several chains run) plus summary.txt. An aborted
/// chain is flushed with its completed prefix and the exit code is 3.
inline int cmd_run(const RunConfig& cfg, std::ostream& os) {
  const AnyModel model = validate_config(cfg);
  const fs::path dir = cfg.output.directory;
  ensure_directory(dir);
  const std::vector<Chain> chains = run_model_chains(model, cfg.scan, cfg.run, true);
  std::string summary;
  bool aborted = false;
  for (const Chain& c : chains) {
    if (chains.size() == 1) save_chain(c, dir);
    else {
      const std::string i = std::to_string(c.meta.chain_index);
      save_chain(c, dir, "chain_" + i + ".csv", "meta_" + i + ".json");
    }
    summary += summary_text(c);
    aborted = aborted || c.meta.aborted;
  }
  write_text(dir / "summary.txt", summary);
  os << summary;
  if (aborted) {
    std::cerr << "error: chain aborted; partial chain written to " << dir.string() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check

inline nlohmann::json report_to_json(const ErgodicityReport& r) {
  nlohmann::json conds = nlohmann::json::array();
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_threshold(v)); };
  for (const Condition& c : r.conditions)
    conds.push_back({{"name", c.name},
                     {"quantity", c.quantity},
                     {"relation", c.relation},
                     {"required", std::isnan(c.required) ? nlohmann::json(nullptr) : num(c.required)},
                     {"supplied", std::isnan(c.supplied) ? nlohmann::json(nullptr) : num(c.supplied)},
                     {"alternative", c.alternative},
                     {"note", c.note},
                     {"pass", c.pass},
                     {"text", c.text()}});
  return {{"model", r.model},
          {"algorithm", to_string(r.algorithm)},
          {"verdict", to_string(r.verdict)},
          {"conditions", conds},
          {"footer", r.footer}};
}

inline ErgodicityReport check_model(const AnyModel& model, const ScanSpec& scan) {
  const Algorithm alg = scan.kind == ScanKind::SS ? Algorithm::SS : Algorithm::HS;
  if (const auto* g = std::get_if<GlmmModel>(&model)) return check_glmm(*g);
  if (const auto* s = std::get_if<SmnModel>(&model)) return check_smn(*s, alg);
  ErgodicityReport rep;
  rep.model = std::holds_alternative<StudentTModel>(model) ? "student_t" : "toy_laplace";
  rep.algorithm = alg;
  Condition c;
  c.name = "model";
  c.note = "no sufficient conditions implemented for this model";
  rep.conditions.push_back(c);
  rep.finalize();
  return rep;
}

/// Prints the ergodicity report (text, or JSON with --format json) and writes
/// report.txt and report.json when an output directory was given.
inline int cmd_check(const RunConfig& cfg, const CliOptions& opt, std::ostream& os) {
  const AnyModel model = build_model(cfg);
  const ErgodicityReport rep = check_model(model, cfg.scan);
  const nlohmann::json j = report_to_json(rep);
  if (opt.format && *opt.format == "json") os << j.dump(2) << "\n";
  else os << rep.text();
  if (opt.out) {
    ensure_directory(*opt.out);
    write_text(*opt.out / "report.txt", rep.text());
    write_text(*opt.out / "report.json", j.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// diagnose

/// Per-parameter posterior summaries and lag-1..5 autocorrelations of a saved
/// chain, as diagnostics.csv or diagnostics.json in the chain directory (or --out).
inline int cmd_diagnose(const fs::path& chain_dir, const std::optional<fs::path>& out, const std::string& format,
                        std::ostream& os) {
  const Chain chain = load_chain(chain_dir);
  const auto rows = summarize_chain(chain);
  nlohmann::json j = nlohmann::json::array();
  std::string csv = "param,mean,sd,mcse,ess,acf1,acf2,acf3,acf4,acf5\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector x = chain.kept(static_cast<Eigen::Index>(i));
    std::vector<double> acf(5, NAN);
    if (x.size() > 6 && rows[i].sd > 0.0) {
      const Vector a = autocorrelation(x, 5);
      for (int k = 0; k < 5; ++k) acf[static_cast<std::size_t>(k)] = a(k + 1);
    }
    csv += rows[i].name + "," + format_double(rows[i].mean) + "," + format_double(rows[i].sd) + "," +
           format_double(rows[i].mcse) + "," + format_double(rows[i].ess);
    for (double a : acf) csv += "," + format_double(a);
    csv += "\n";
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json acfj = nlohmann::json::array();
    for (double a : acf) acfj.push_back(num(a));
    j.push_back({{"param", rows[i].name},
                 {"mean", num(rows[i].mean)},
                 {"sd", num(rows[i].sd)},
                 {"mcse", num(rows[i].mcse)},
                 {"ess", num(rows[i].ess)},
                 {"acf", acfj}});
  }
  const fs::path dir = out ? *out : chain_dir;
  ensure_directory(dir);
  if (format == "json") {
    const std::string text = j.dump(2) + "\n";
    write_text(dir / "diagnostics.json", text);
    os << text;
  } else {
    write_text(dir / "diagnostics.csv", csv);
    os << csv;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

/// Test-function series compared across scans: the GLMM fit statistic,
/// U^2 for the toy Laplace model and sigma2 otherwise.
inline Vector compare_series(const AnyModel& model, const Chain& c) {
  if (const auto* g = std::get_if<GlmmModel>(&model)) return glmm_test_function_series(*g, c);
  if (std::holds_alternative<ToyLaplaceModel>(model)) return c.kept("u").array().square().matrix();
  return c.kept("sigma2");
}

inline std::string compare_series_label(const AnyModel& model) {
  if (std::holds_alternative<GlmmModel>(model)) return "(y - W theta)'(y - W theta) + lambda0 + lambda1";
  if (std::holds_alternative<ToyLaplaceModel>(model)) return "u^2";
  return "sigma2";
}

/// The four Gibbs scans on one model, with iteration budgets in the ratio
/// SS : HS : HSS : RS = 2 : 3 : 3 : 6 (HS gets `hs_iterations`). HSS uses
/// every group move the model supports.
inline std::vector<std::pair<ScanSpec, std::size_t>> comparison_scans(const AnyModel& model, double r,
                                                                      std::size_t hs_iterations) {
  ScanSpec hss = ScanSpec::hss(r, false, false);
  if (std::holds_alternative<GlmmModel>(model)) hss.use_r1 = true;
  if (const auto* t = std::get_if<StudentTModel>(&model)) {
    hss.use_r1 = true;
    hss.use_r2 = t->flat_prior();
  }
  const std::size_t base = std::max<std::size_t>(hs_iterations / 3, 1);
  return {{ScanSpec::ss(), 2 * base}, {ScanSpec::hs(r), 3 * base}, {hss, 3 * base}, {ScanSpec::rs(), 6 * base}};
}

inline std::string model_fingerprint(const RunConfig& cfg) {
  std::string out = cfg.model_kind + "|";
  for (const auto& [k, v] : cfg.model) {
    const bool is_path = k == "x" || k == "y" || k == "z" || k == "data";
    out += k + "=" + (is_path ? fs::weakly_canonical(cfg.base_dir / v).string() : v) + ";";
  }
  return out;
}

/// Runs the lag-normalized ACF comparison and writes acf.csv and summary.txt.
/// With one configuration the scans come from comparison_scans (or DA versus
/// its sandwich variant for the toy Laplace model); with several, each
/// configuration supplies its own scan and all must describe the same data.
inline int cmd_compare(const std::vector<RunConfig>& cfgs, std::ostream& os) {
  if (cfgs.empty()) throw ConfigError("compare needs at least one configuration");
  const std::string fp = model_fingerprint(cfgs.front());
  for (const RunConfig& c : cfgs)
    if (model_fingerprint(c) != fp) throw ConfigError("compare: configurations describe different data sets");
  const RunConfig& base = cfgs.front();
  const AnyModel model = validate_config(base);

  std::vector<std::pair<ScanSpec, std::size_t>> plan;
  if (cfgs.size() > 1) {
    for (const RunConfig& c : cfgs) {
      validate_scan_for(model, c.scan);
      plan.emplace_back(c.scan, c.run.iterations);
    }
  } else if (std::holds_alternative<ToyLaplaceModel>(model)) {
    plan = {{ScanSpec::da(false), base.run.iterations}, {ScanSpec::da(true), base.run.iterations}};
  } else {
    plan = comparison_scans(model, base.scan.kind == ScanKind::HS || base.scan.kind == ScanKind::HSS ? base.scan.r : 0.5,
                            base.run.iterations);
  }

  std::vector<Chain> chains;
  RunOptions ro;
  ro.burn_in_fraction = base.run.burn_in_fraction;
  for (const auto& [scan, n] : plan) {
    chains.push_back(std::visit([&](const auto& m) { return run_chain(m, scan, n, base.run.seed, ro); }, model));
    os << chains.back().meta.scan_detail << ": " << n << " iterations, " << format_double(chains.back().meta.wall_seconds)
       << " s\n";
  }
  const AcfTable table = compare_table(
      chains, [&](const Chain& c) { return compare_series(model, c); }, base.compare.k_max,
      compare_series_label(model));
  const fs::path dir = base.output.directory;
  ensure_directory(dir);
  write_text(dir / "acf.csv", table.to_csv());
  write_text(dir / "summary.txt", table.summary());
  os << table.summary();
  return kExitOk;
}

/// Maps the error hierarchy onto exit codes and prints the message.
template <class F>
int guarded(F&& f, std::ostream& err = std::cerr) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace hsg
