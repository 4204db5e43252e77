#include <iostream>

#include "CLI11.hpp"

#include "hsg/cli.hpp"
#include "hsg/property_suite.hpp"

namespace {

void add_common(CLI::App* cmd, hsg::CliOptions& opt, bool multi_config = false) {
  if (multi_config)
    cmd->add_option("--config", opt.configs, "configuration file (repeat for one scan per file)");
  else
    cmd->add_option_function<std::string>(
        "--config", [&opt](const std::string& p) { opt.configs = {p}; }, "configuration file");
  cmd->add_option_function<std::string>(
      "--preset", [&opt](const std::string& p) { opt.preset = p; }, "built-in configuration");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&opt](std::uint64_t s) { opt.seed = s; }, "master seed");
  cmd->add_option_function<std::string>(
      "--out", [&opt](const std::string& p) { opt.out = p; }, "output directory");
  cmd->add_option_function<std::string>(
      "--format", [&opt](const std::string& f) { opt.format = f; }, "csv or json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-scan and sandwich Gibbs samplers"};
  app.require_subcommand(1);
  hsg::CliOptions opt;

  auto* simulate = app.add_subcommand("simulate", "write y.csv, X.csv, Z.csv and truth.json for a GLMM setting");
  add_common(simulate, opt);
  auto* run = app.add_subcommand("run", "run chains and write chain.csv and meta.json");
  add_common(run, opt);
  auto* check = app.add_subcommand("check", "print the geometric-ergodicity report");
  add_common(check, opt);
  auto* diagnose = app.add_subcommand("diagnose", "summaries and autocorrelations of a saved chain");
  add_common(diagnose, opt);
  diagnose->add_option_function<std::string>(
      "--chain", [&opt](const std::string& p) { opt.chain_dir = p; }, "directory holding chain.csv and meta.json");
  auto* compare = app.add_subcommand("compare", "lag-normalized ACF comparison of the scans");
  add_common(compare, opt, true);

  std::string suite, budget = "small";
  std::uint64_t suite_seed = 20240601;
  auto* test_suite = app.add_subcommand("test-suite", "");
  test_suite->group("");
  test_suite->add_option("name", suite)->required();
  test_suite->add_option("--budget", budget);
  test_suite->add_option("--seed", suite_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hsg::kExitConfig;
  }

  using hsg::guarded;
  if (simulate->parsed())
    return guarded([&] { return hsg::cmd_simulate(hsg::resolve_config(opt), opt, std::cout); });
  if (run->parsed()) return guarded([&] { return hsg::cmd_run(hsg::resolve_config(opt), std::cout); });
  if (check->parsed()) return guarded([&] { return hsg::cmd_check(hsg::resolve_config(opt), opt, std::cout); });
  if (diagnose->parsed())
    return guarded([&] {
      hsg::fs::path dir;
      if (opt.chain_dir) dir = *opt.chain_dir;
      else if (opt.out) dir = *opt.out;
      else dir = hsg::resolve_config(opt).output.directory;
      return hsg::cmd_diagnose(dir, opt.chain_dir ? opt.out : std::nullopt, opt.format.value_or("csv"), std::cout);
    });
  if (compare->parsed())
    return guarded([&] {
      std::vector<hsg::RunConfig> cfgs;
      if (opt.preset || opt.configs.size() <= 1) cfgs.push_back(hsg::resolve_config(opt));
      else
        for (std::size_t i = 0; i < opt.configs.size(); ++i) cfgs.push_back(hsg::resolve_config(opt, i));
      return hsg::cmd_compare(cfgs, std::cout);
    });
  if (test_suite->parsed())
    return guarded([&] {
      const hsg::SuiteResult r = hsg::run_suite(suite, budget, suite_seed);
      std::cout << r.to_json().dump(2) << "\n";
      if (const hsg::CheckResult* f = r.first_failure()) {
        std::cerr << "suite " << suite << " failed at check: " << f->name << "\n";
        return 1;
      }
      return 0;
    });
  return hsg::kExitConfig;
}
