#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hsg/cli.hpp"
#include "hsg/property_suite.hpp"

using namespace hsg;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("hsg-test-" + tag + "-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "-" + std::to_string(counter()++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path path_;
};

SmnModel smn_model(double alpha, MixingDensity mixing, Eigen::Index m = 2) {
  Vector y = Vector::LinSpaced(m, -1.0, 1.0);
  return SmnModel(y, Matrix::Ones(m, 1), Vector::Zero(1), Matrix::Identity(1, 1), alpha, 1.0, std::move(mixing));
}

GlmmModel table_model(int setting, std::optional<double> a0 = std::nullopt) {
  return setting_model(setting, 101, a0);
}

const char* kToyT = "[model]\nkind = student_t\nw = -1.2, 0.3, 0.8, 2.1, -0.4\nnu = 4\n[scan]\nkind = HS\nr = 0.5\n";

}  // namespace

// --- ergodicity --------------------------------------------------------------

TEST(Ergodicity, SettingOneThreshold) {
  const ErgodicityReport r = check_glmm(table_model(1));
  const Condition& a0 = find_condition(r, "a0 bound");
  EXPECT_DOUBLE_EQ(a0.required, -36.5);
  EXPECT_TRUE(a0.pass);
  EXPECT_EQ(r.verdict, Verdict::Established);
}

TEST(Ergodicity, SettingTwoThresholdAndFailureJustBelow) {
  const ErgodicityReport pass = check_glmm(table_model(2));
  EXPECT_DOUBLE_EQ(find_condition(pass, "a0 bound").required, 76.0);
  EXPECT_EQ(pass.verdict, Verdict::Established);
  EXPECT_EQ(find_condition(pass, "a0 bound").text(), "a0 bound: required a0 > 76, supplied 77: pass");
  const ErgodicityReport fail = check_glmm(table_model(2, 76.0));
  EXPECT_EQ(fail.verdict, Verdict::NotEstablished);
}

TEST(Ergodicity, SettingThreeUsesRankOfX) {
  const ErgodicityReport r = check_glmm(table_model(3));
  EXPECT_DOUBLE_EQ(find_condition(r, "a0 bound").required, 151.0);
  EXPECT_EQ(r.verdict, Verdict::Established);
}

TEST(Ergodicity, InverseGammaSsThreshold) {
  EXPECT_NEAR(invgamma_ss_alpha_threshold(2.0), (1.0 + std::sqrt(2.0)) / 2.0, 1e-12);
  EXPECT_EQ(check_smn(smn_model(1.25, InvGammaMixing{2.0}), Algorithm::SS).verdict, Verdict::Established);
  EXPECT_EQ(check_smn(smn_model(1.2, InvGammaMixing{2.0}), Algorithm::SS).verdict, Verdict::NotEstablished);
  const ErgodicityReport r = check_smn(smn_model(1.2, InvGammaMixing{2.0}), Algorithm::SS);
  EXPECT_NE(r.conditions.front().text().find("required alpha > 1.207107"), std::string::npos);
}

TEST(Ergodicity, InverseGammaAlphaFiveQuartersPassesForAnyM) {
  for (Eigen::Index m : {2, 3, 5, 10, 50, 400})
    EXPECT_EQ(check_smn(smn_model(1.25, InvGammaMixing{2.0}, m), Algorithm::SS).verdict, Verdict::Established) << m;
}

TEST(Ergodicity, StudentTSsPassesForEveryNuWhenBranchesOverlap) {
  for (double nu : {0.01, 0.1, 0.15, 0.5, 4.0, 100.0})
    EXPECT_EQ(check_smn(smn_model(2.0, StudentTMixing{nu}, 10), Algorithm::SS).verdict, Verdict::Established) << nu;
}

TEST(Ergodicity, StudentTHsIsUnconditional) {
  EXPECT_EQ(check_smn(smn_model(0.5, StudentTMixing{4.0}), Algorithm::HS).verdict, Verdict::Established);
}

TEST(Ergodicity, CustomMixingIsNotEstablished) {
  CustomMixing h{[](double z) { return -z; }, [](RngStream& r) { return r.exponential(); }};
  const ErgodicityReport r = check_smn(smn_model(2.0, h), Algorithm::SS);
  EXPECT_EQ(r.verdict, Verdict::NotEstablished);
  EXPECT_NE(r.text().find("no closed-form condition"), std::string::npos);
}

TEST(Ergodicity, DriftFunction) {
  const SmnModel model(Vector::Zero(3), Matrix::Ones(3, 2), Vector::Zero(2), Matrix::Identity(2, 2), 2.0, 1.0,
                       StudentTMixing{4.0});
  EXPECT_DOUBLE_EQ(drift_V(Vector::Zero(2), 1.0, model), 2.0);
  EXPECT_THROW(drift_V(Vector::Zero(2), 0.0, model), DomainError);
  RngStream rng(1);
  for (int i = 0; i < 200; ++i) {
    Vector b(2);
    b << 3 * rng.normal(), 3 * rng.normal();
    EXPECT_GE(drift_V(b, std::exp(2 * rng.normal()), model), 2.0);
  }
  Vector b(2);
  b << 1.0, -0.5;
  double prev = 0.0;
  for (double t : {1.0, 10.0, 100.0, 1000.0}) {
    const double v = drift_V(t * b, 1.0, model);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

// --- io ----------------------------------------------------------------------

TEST(Csv, ParsesHeaderAndValues) {
  const CsvTable t = parse_csv("a,b\n1,2\n3,4.5\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.values.rows(), 2);
  EXPECT_DOUBLE_EQ(t.values(1, 1), 4.5);
}

TEST(Csv, RaggedRowsAndGarbageAreIoErrors) {
  EXPECT_THROW(parse_csv("1,2\n3\n"), IoError);
  EXPECT_THROW(parse_csv("1,2\n3,x\n"), IoError);
  EXPECT_THROW(parse_csv("a,b,c\n1,2\n"), IoError);
}

TEST(Csv, MissingFileIsIoError) { EXPECT_THROW(read_csv("/nonexistent/dir/file.csv"), IoError); }

TEST(ChainFiles, RoundTripIsExact) {
  TempDir dir("roundtrip");
  const Chain c = run_chain(setting_model(1, 101), ScanSpec::hss(0.5, true, false), 200, 3);
  save_chain(c, dir.path());
  const Chain back = load_chain(dir.path());
  EXPECT_EQ(back.param_names, c.param_names);
  ASSERT_EQ(back.samples.rows(), c.samples.rows());
  EXPECT_EQ(back.samples, c.samples);
  EXPECT_EQ(back.meta.scan_detail, c.meta.scan_detail);
  EXPECT_EQ(back.meta.counters.group_moves, c.meta.counters.group_moves);
  EXPECT_EQ(back.meta.burn_in, c.meta.burn_in);
}

TEST(ChainFiles, TruncatedChainIsIoError) {
  TempDir dir("truncated");
  const Chain c = run_chain(StudentTModel(Vector::LinSpaced(4, 0, 1), 4.0), ScanSpec::ss(), 50, 3);
  save_chain(c, dir.path());
  std::string csv = read_text(dir.path() / "chain.csv");
  csv.erase(csv.rfind('\n', csv.size() - 2) + 1);
  write_text(dir.path() / "chain.csv", csv);
  EXPECT_THROW(load_chain(dir.path()), IoError);
}

// --- config ------------------------------------------------------------------

TEST(Config, EveryPresetValidates) {
  for (const auto& [name, text] : preset_texts()) EXPECT_NO_THROW(validate_config(preset_config(name))) << name;
}

TEST(Config, UnknownPresetListsPresets) {
  try {
    preset_config("nope");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("table1-setting2"), std::string::npos);
  }
}

TEST(Config, SelectionProbabilityOneIsRejected) {
  EXPECT_THROW(parse_config("[model]\nkind = toy_laplace\n[scan]\nkind = HS\nr = 1.0\n"), ConfigError);
}

TEST(Config, UnknownSectionsAndKeysAreRejected) {
  EXPECT_THROW(parse_config(std::string(kToyT) + "[extra]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config(std::string(kToyT) + "[run]\niteration = 5\n"), ConfigError);
  EXPECT_THROW(validate_config(parse_config(std::string(kToyT) + "[model]\n")), ConfigError);
  RunConfig cfg = parse_config(kToyT);
  cfg.model["colour"] = "blue";
  EXPECT_THROW(validate_config(cfg), ConfigError);
}

TEST(Config, ScanModelMismatchIsConfigError) {
  EXPECT_THROW(validate_config(parse_config("[model]\nkind = toy_laplace\n[scan]\nkind = SS\n")), ConfigError);
  EXPECT_THROW(validate_config(parse_config("[model]\nkind = glmm\nsetting = 1\n[scan]\nkind = DA\n")), ConfigError);
}

TEST(Config, ModelDomainErrorsBecomeConfigErrors) {
  EXPECT_THROW(validate_config(parse_config("[model]\nkind = student_t\nw = 1, 2\nnu = -1\n[scan]\nkind = SS\n")),
               ConfigError);
  EXPECT_THROW(validate_config(parse_config("[model]\nkind = glmm\nsetting = 7\n[scan]\nkind = HS\n")), ConfigError);
}

TEST(Config, FileBackedGlmmResolvesRelativePaths) {
  TempDir dir("glmmfiles");
  const GlmmDataset d = simulate_setting(1, 5);
  write_text(dir.path() / "y.csv", csv_string({"y"}, Matrix(d.sim.y)));
  write_text(dir.path() / "X.csv", csv_string({}, d.design.x));
  write_text(dir.path() / "Z.csv", csv_string({}, d.design.z_blocks.front()));
  write_text(dir.path() / "run.ini",
             "[model]\nkind = glmm\ny = y.csv\nx = X.csv\nz = Z.csv\na = 1, 1.5\nb = 1, 1\n[scan]\nkind = HSS\nuse_r2 = false\n");
  const AnyModel m = validate_config(load_config(dir.path() / "run.ini"));
  const GlmmModel& g = std::get<GlmmModel>(m);
  EXPECT_EQ(g.n_obs(), 100);
  EXPECT_EQ(g.q(), 5);
  EXPECT_EQ(g.y(), d.sim.y);
}

TEST(Config, FuzzedInputsOnlyRaiseConfigOrIoErrors) {
  const std::string base =
      "[model]\nkind = glmm\nsetting = 1\ndata_seed = 3\n[scan]\nkind = HSS\nr = 0.5\nuse_r1 = true\nuse_r2 = false\n"
      "[run]\niterations = 20\nburn_in_fraction = 0.25\nseed = 4\n[output]\nformat = csv\n[compare]\nk_max = 3\n";
  const std::string alphabet = "[]=,.-+e0123456789abcdefghijklmnopqrstuvwxyz \n#;\"";
  ASSERT_NO_THROW(validate_config(parse_config(base)));
  RngStream rng(20240601);
  int accepted = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::string text = base;
    const int edits = 1 + static_cast<int>(rng.uniform() * 4);
    for (int e = 0; e < edits; ++e) {
      const auto pos = static_cast<std::size_t>(rng.uniform() * static_cast<double>(text.size()));
      const double kind = rng.uniform();
      const char ch = alphabet[static_cast<std::size_t>(rng.uniform() * static_cast<double>(alphabet.size()))];
      if (kind < 0.4) text.erase(pos, 1);
      else if (kind < 0.7) text.insert(pos, 1, ch);
      else text[pos] = ch;
    }
    try {
      const RunConfig cfg = parse_config(text);
      validate_config(cfg);
      ++accepted;
    } catch (const ConfigError&) {
    } catch (const IoError&) {
    } catch (const std::exception& e) {
      ADD_FAILURE() << "unexpected " << typeid(e).name() << ": " << e.what() << "\n--- input ---\n" << text;
    }
  }
  EXPECT_GT(accepted, 0);
}

// --- cli -----------------------------------------------------------------------

TEST(Cli, SimulateSettingTwoIsDeterministic) {
  TempDir a("sim-a"), b("sim-b");
  std::ostringstream os;
  CliOptions opt;
  opt.preset = "table1-setting2";
  for (const TempDir* d : {&a, &b}) {
    opt.out = d->path();
    ASSERT_EQ(cmd_simulate(resolve_config(opt), opt, os), kExitOk);
  }
  for (const char* f : {"y.csv", "X.csv", "Z.csv", "truth.json"})
    EXPECT_EQ(read_text(a.path() / f), read_text(b.path() / f)) << f;
  const nlohmann::json truth = nlohmann::json::parse(read_text(a.path() / "truth.json"));
  EXPECT_EQ(truth["n"], 100);
  EXPECT_EQ(truth["p"], 100);
  EXPECT_EQ(truth["hyper"]["a"][0], 77.0);
  EXPECT_EQ(truth["hyper"]["b"][0], 77.0);
  EXPECT_EQ(read_matrix_csv(a.path() / "X.csv").cols(), 100);
}

TEST(Cli, ConflictingAndMissingSourcesAreConfigErrors) {
  CliOptions opt;
  EXPECT_THROW(resolve_config(opt), ConfigError);
  opt.preset = "toy-t";
  opt.configs = {"x.ini"};
  EXPECT_THROW(resolve_config(opt), ConfigError);
}

TEST(Cli, RunWritesChainAndMeta) {
  TempDir dir("run");
  RunConfig cfg = parse_config("[model]\nkind = student_t\nw = -1.2, 0.3, 0.8, 2.1, -0.4\nnu = 4\n"
                               "[scan]\nkind = RS\n[run]\niterations = 300\n");
  cfg.output.directory = dir.path();
  std::ostringstream os;
  ASSERT_EQ(cmd_run(cfg, os), kExitOk);
  const Chain c = load_chain(dir.path());
  EXPECT_EQ(c.rows(), 300);
  EXPECT_EQ(c.meta.updates_per_iteration, 1);
  EXPECT_TRUE(fs::exists(dir.path() / "summary.txt"));
}

TEST(Cli, ParallelRunWritesOneFilePerChain) {
  TempDir dir("parallel");
  RunConfig cfg = preset_config("toy-laplace");
  cfg.run.iterations = 500;
  cfg.run.n_parallel_chains = 3;
  cfg.output.directory = dir.path();
  std::ostringstream os;
  ASSERT_EQ(cmd_run(cfg, os), kExitOk);
  for (int i = 0; i < 3; ++i) {
    const Chain c = load_chain(dir.path(), "chain_" + std::to_string(i) + ".csv", "meta_" + std::to_string(i) + ".json");
    EXPECT_EQ(c.meta.chain_index, static_cast<std::uint64_t>(i));
  }
}

TEST(Cli, CheckPrintsTheSettingTwoCondition) {
  CliOptions opt;
  opt.preset = "table1-setting2";
  std::ostringstream os;
  EXPECT_EQ(cmd_check(resolve_config(opt), opt, os), kExitOk);
  EXPECT_NE(os.str().find("required a0 > 76, supplied 77: pass"), std::string::npos);
}

TEST(Cli, CheckInverseGammaJson) {
  const RunConfig cfg = parse_config(
      "[model]\nkind = smn\nn = 2\np = 1\nmixing = inv_gamma\nmixing_alpha = 2\nalpha = 1.1\ngamma = 1\n"
      "[scan]\nkind = SS\n");
  CliOptions opt;
  opt.format = "json";
  std::ostringstream os;
  cmd_check(cfg, opt, os);
  const nlohmann::json j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j["verdict"], "NotEstablished");
  EXPECT_NE(j["conditions"][0]["text"].get<std::string>().find("required alpha > 1.207107"), std::string::npos);
}

TEST(Cli, DiagnoseWritesSummaries) {
  TempDir dir("diagnose");
  const Chain c = run_chain(StudentTModel(Vector::LinSpaced(5, -1, 2), 4.0), ScanSpec::hs(), 2000, 5);
  save_chain(c, dir.path());
  std::ostringstream os;
  ASSERT_EQ(cmd_diagnose(dir.path(), std::nullopt, "json", os), kExitOk);
  const nlohmann::json j = nlohmann::json::parse(read_text(dir.path() / "diagnostics.json"));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["param"], "mu");
}

TEST(Cli, CompareToyLaplaceHasTwoScans) {
  TempDir dir("compare-toy");
  RunConfig cfg = preset_config("toy-laplace");
  cfg.run.iterations = 20000;
  cfg.compare.k_max = 5;
  cfg.output.directory = dir.path();
  std::ostringstream os;
  ASSERT_EQ(cmd_compare({cfg}, os), kExitOk);
  const std::string csv = read_text(dir.path() / "acf.csv");
  std::istringstream lines(csv);
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 10);
  EXPECT_NE(csv.find("1,DA,1,"), std::string::npos);
  EXPECT_NE(csv.find("5,SANDWICH,5,"), std::string::npos);
}

TEST(Cli, CompareGlmmUsesLagNormalizedRows) {
  TempDir dir("compare-glmm");
  RunConfig cfg = preset_config("table1-setting1");
  cfg.run.iterations = 600;
  cfg.compare.k_max = 6;
  cfg.output.directory = dir.path();
  std::ostringstream os;
  ASSERT_EQ(cmd_compare({cfg}, os), kExitOk);
  const std::string csv = read_text(dir.path() / "acf.csv");
  for (const char* row : {"6,SS,12,", "6,HS,18,", "6,HSS,18,", "6,RS,36,", "2,SS,4,", "2,RS,12,"})
    EXPECT_NE(csv.find(row), std::string::npos) << row;
}

TEST(Cli, CompareRejectsMismatchedData) {
  RunConfig a = preset_config("table1-setting1");
  RunConfig b = a;
  b.model["data_seed"] = "999";
  std::ostringstream os;
  EXPECT_THROW(cmd_compare({a, b}, os), ConfigError);
}

TEST(Cli, GuardedMapsErrorsToExitCodes) {
  std::ostringstream err;
  EXPECT_EQ(guarded([]() -> int { throw ConfigError("x"); }, err), kExitConfig);
  EXPECT_EQ(guarded([]() -> int { throw DomainError("x"); }, err), kExitConfig);
  EXPECT_EQ(guarded([]() -> int { throw UnsupportedError("x"); }, err), kExitConfig);
  EXPECT_EQ(guarded([]() -> int { throw RejectionCapError("x"); }, err), kExitNumerical);
  EXPECT_EQ(guarded([]() -> int { throw IoError("x"); }, err), kExitIo);
  EXPECT_EQ(guarded([] { return 0; }, err), kExitOk);
}

TEST(Cli, UnwritableOutputIsIoError) {
  TempDir dir("unwritable");
  write_text(dir.path() / "file", "x");
  CliOptions opt;
  opt.preset = "table1-setting1";
  opt.out = dir.path() / "file" / "sub";
  std::ostringstream os, err;
  EXPECT_EQ(guarded([&] { return cmd_simulate(resolve_config(opt), opt, os); }, err), kExitIo);
}

// --- property suite ------------------------------------------------------------

TEST(PropertySuite, ThresholdsPass) {
  const SuiteResult r = run_suite("thresholds", "small");
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  for (const CheckResult& c : r.checks) EXPECT_FALSE(c.name.empty());
}

TEST(PropertySuite, UnknownSuiteAndBudgetAreConfigErrors) {
  EXPECT_THROW(run_suite("everything", "small"), ConfigError);
  EXPECT_THROW(run_suite("thresholds", "huge"), ConfigError);
}

TEST(PropertySuite, FixedSeedReproducesStatisticsBitwise) {
  const CheckResult a = hastings_check(2, 77);
  const CheckResult b = hastings_check(2, 77);
  EXPECT_EQ(std::memcmp(&a.statistic, &b.statistic, sizeof(double)), 0);
  const auto x = toy_laplace_ordering_checks(20000, 5, 2, 0.0);
  const auto y = toy_laplace_ordering_checks(20000, 5, 2, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(std::memcmp(&x[i].statistic, &y[i].statistic, sizeof(double)), 0);
}

TEST(PropertySuite, FirstFailureIsNamed) {
  SuiteResult r{"demo", "small", 1, {make_check("good", 1, "<", 2, 0), make_check("bad", 3, "<", 2, 0)}, 0.0};
  ASSERT_NE(r.first_failure(), nullptr);
  EXPECT_EQ(r.first_failure()->name, "bad");
  EXPECT_EQ(r.to_json()["first_failure"], "bad");
  EXPECT_FALSE(r.passed());
}

TEST(PropertySuite, InfiniteOracleValueFails) {
  EXPECT_FALSE(z_check("v", 1.0, 0.1, INFINITY, 3.0, 0).pass);
  EXPECT_TRUE(z_check("v", 1.0, 0.1, 1.05, 3.0, 0).pass);
}
