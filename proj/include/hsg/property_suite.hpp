#pragma once

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hsg/config.hpp"
#include "hsg/diagnostics.hpp"
#include "hsg/ergodicity.hpp"
#include "hsg/oracle.hpp"
#include "hsg/sandwich.hpp"
#include "hsg/scans.hpp"

namespace hsg {

/// One named check: `statistic relation threshold` decides `pass`.
struct CheckResult {
  std::string name;
  double statistic = NAN;
  double threshold = NAN;
  std::string relation = "<=";
  bool pass = false;
  std::uint64_t seed = 0;
  std::string detail;
};

inline CheckResult make_check(std::string name, double statistic, std::string relation, double threshold,
                              std::uint64_t seed, std::string detail = {}) {
  CheckResult c{std::move(name), statistic, threshold, std::move(relation), false, seed, std::move(detail)};
  if (c.relation == "<=") c.pass = statistic <= threshold;
  else if (c.relation == "<") c.pass = statistic < threshold;
  else if (c.relation == ">=") c.pass = statistic >= threshold;
  else if (c.relation == ">") c.pass = statistic > threshold;
  else if (c.relation == "==") c.pass = statistic == threshold;
  else throw PreconditionError("make_check: unknown relation " + c.relation);
  return c;
}

/// |estimate - truth| / se <= k; an infinite truth fails with a note.
inline CheckResult z_check(std::string name, double estimate, double se, double truth, double k, std::uint64_t seed) {
  if (!std::isfinite(truth))
    return make_check(std::move(name), INFINITY, "<=", k, seed,
                      "oracle value is infinite; estimate " + format_double(estimate));
  const double z = std::abs(estimate - truth) / se;
  return make_check(std::move(name), z, "<=", k, seed,
                    "estimate " + format_double(estimate) + ", oracle " + format_double(truth) + ", se " +
                        format_double(se));
}

struct SuiteResult {
  std::string suite;
  std::string budget;
  std::uint64_t master_seed = 0;
  std::vector<CheckResult> checks;
  double wall_seconds = 0.0;

  bool passed() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  const CheckResult* first_failure() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return &c;
    return nullptr;
  }
  nlohmann::json to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v)); };
    nlohmann::json arr = nlohmann::json::array();
    for (const CheckResult& c : checks)
      arr.push_back({{"name", c.name},
                     {"statistic", num(c.statistic)},
                     {"relation", c.relation},
                     {"threshold", num(c.threshold)},
                     {"pass", c.pass},
                     {"seed", c.seed},
                     {"detail", c.detail}});
    nlohmann::json j = {{"suite", suite},     {"budget", budget}, {"master_seed", master_seed},
                        {"passed", passed()}, {"checks", arr}};
    if (const CheckResult* f = first_failure()) j["first_failure"] = f->name;
    return j;
  }
};

/// Seed of the k-th check of a suite (splitmix64 of the master seed).
inline std::uint64_t check_seed(std::uint64_t master, std::uint64_t k) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Building blocks shared by the suites and the acceptance run

/// Mean and variance estimates with batch-means standard errors.
struct MomentEstimate {
  double mean, mean_se, var, var_se;
};

inline MomentEstimate moment_estimate(const Vector& x) {
  MomentEstimate e;
  e.mean = sample_mean(x);
  e.mean_se = batch_means_se(x);
  const Vector sq = (x.array() - e.mean).square().matrix();
  e.var = sample_mean(sq);
  e.var_se = batch_means_se(sq);
  return e;
}

/// Posterior means and variances of (mu, sigma2) from each scan against the
/// quadrature oracle; chain i uses seed + i.
inline std::vector<CheckResult> t_stationarity_checks(const StudentTModel& model, const StudentTPosteriorOracle& oracle,
                                                      const std::vector<ScanSpec>& scans, std::size_t iterations,
                                                      std::uint64_t seed, double k_se) {
  std::vector<CheckResult> out;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const std::uint64_t s = seed + i;
    const Chain c = run_chain(model, scans[i], iterations, s);
    const MomentEstimate mu = moment_estimate(c.kept("mu"));
    const MomentEstimate s2 = moment_estimate(c.kept("sigma2"));
    const std::string tag = scans[i].describe() + " ";
    out.push_back(z_check(tag + "E[mu]", mu.mean, mu.mean_se, oracle.mean_mu, k_se, s));
    out.push_back(z_check(tag + "Var[mu]", mu.var, mu.var_se, oracle.var_mu, k_se, s));
    out.push_back(z_check(tag + "E[sigma2]", s2.mean, s2.mean_se, oracle.mean_sigma2, k_se, s));
    out.push_back(z_check(tag + "Var[sigma2]", s2.var, s2.var_se, oracle.var_sigma2, k_se, s));
  }
  return out;
}

inline Chain toy_laplace_chain(bool sandwich, std::size_t iterations, std::uint64_t seed) {
  return run_chain(ToyLaplaceModel{}, ScanSpec::da(sandwich), iterations, seed);
}

inline Vector squared(const Vector& x) { return x.array().square().matrix(); }

/// E[U^2] = 3 from a DA or sandwich chain.
inline CheckResult toy_laplace_moment_check(bool sandwich, std::size_t iterations, std::uint64_t seed, double k_se) {
  const Vector u2 = squared(toy_laplace_chain(sandwich, iterations, seed).kept("u"));
  return z_check(std::string(sandwich ? "sandwich" : "DA") + " E[U^2]", sample_mean(u2), batch_means_se(u2), 3.0,
                 k_se, seed);
}

/// ACF of U^2 under DA minus ACF under the sandwich chain, in units of the
/// jackknife SE of the difference, at lags 1..max_lag (independent chains
/// with seeds seed and seed + 1).
inline std::vector<CheckResult> toy_laplace_ordering_checks(std::size_t iterations, std::uint64_t seed,
                                                            std::size_t max_lag, double k_se) {
  const Vector da = squared(toy_laplace_chain(false, iterations, seed).kept("u"));
  const Vector sw = squared(toy_laplace_chain(true, iterations, seed + 1).kept("u"));
  const Vector acf_da = autocorrelation(da, max_lag);
  const Vector acf_sw = autocorrelation(sw, max_lag);
  std::vector<CheckResult> out;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double se = std::hypot(acf_jackknife_se(da, k), acf_jackknife_se(sw, k));
    out.push_back(make_check("ACF lag " + std::to_string(k) + " DA - sandwich margin / SE", (acf_da(kk) - acf_sw(kk)) / se,
                             ">", k_se, seed,
                             "DA " + format_double(acf_da(kk)) + ", sandwich " + format_double(acf_sw(kk))));
  }
  return out;
}

/// The m = 3 Student's t data set used by the Hastings-ratio identity.
inline StudentTModel hastings_model() {
  Vector w(3);
  w << -0.7, 0.4, 1.5;
  return StudentTModel(w, 4.0);
}

inline std::vector<HastingsPair> random_hastings_pairs(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<HastingsPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    HastingsPair p;
    if (i % 2 == 0) {
      p.block = TBlock::Scale;
      p.from = std::exp(0.8 * rng.normal());
      p.to = std::exp(0.8 * rng.normal());
      p.fixed = -0.5 + 2.0 * rng.uniform();
    } else {
      p.block = TBlock::Location;
      p.from = -1.0 + 3.0 * rng.uniform();
      p.to = -1.0 + 3.0 * rng.uniform();
      p.fixed = std::exp(0.5 * rng.normal());
    }
    pairs.push_back(p);
  }
  return pairs;
}

inline CheckResult hastings_check(std::size_t n_pairs, std::uint64_t seed, double tol = 1e-6) {
  const double worst = hastings_ratio_check(hastings_model(), random_hastings_pairs(n_pairs, seed));
  return make_check("max |r(x,x') - 1| over " + std::to_string(n_pairs) + " pairs", worst, "<", tol, seed);
}

inline std::vector<CheckResult> toy_kernel_symmetry_checks(std::size_t grid_points, double tol = 1e-6) {
  const ToyLaplaceOracle o = quadrature_toy_laplace(grid_points);
  return {make_check("sandwich kernel detailed balance, max |k f - k^T f|", o.max_asymmetry, "<", tol, 0),
          make_check("quadrature E[U^2] - 3", std::abs(o.mean_u2 - 3.0), "<", tol, 0),
          make_check("2-D quadrature E[U^2] - 3", std::abs(o.mean_u2_2d - 3.0), "<", tol, 0)};
}

// thresholds ---------------------------------------------------------------

inline GlmmModel setting_model(int setting, std::uint64_t data_seed, std::optional<double> a0 = std::nullopt) {
  GlmmDataset d = simulate_setting(setting, data_seed);
  if (a0) d.design.hyper.a[0] = *a0;
  return GlmmModel(d.sim.y, d.design.x, d.design.z_blocks, d.design.hyper);
}

inline const Condition& find_condition(const ErgodicityReport& r, const std::string& name) {
  for (const Condition& c : r.conditions)
    if (c.name == name) return c;
  throw PreconditionError("report has no condition '" + name + "'");
}

inline std::vector<CheckResult> threshold_checks(std::uint64_t data_seed) {
  std::vector<CheckResult> out;
  struct Case {
    int setting;
    double a0;
    double expected_threshold;
    bool expected_pass;
  };
  const Case cases[] = {{1, 1.0, -36.5, true}, {2, 77.0, 76.0, true}, {2, 76.0, 76.0, false}, {3, 152.0, 151.0, true}};
  for (const Case& c : cases) {
    const ErgodicityReport rep = check_glmm(setting_model(c.setting, data_seed, c.a0));
    const Condition& a0 = find_condition(rep, "a0 bound");
    const std::string tag = "setting " + std::to_string(c.setting) + " a0=" + format_threshold(c.a0);
    out.push_back(make_check(tag + " threshold error", std::abs(a0.required - c.expected_threshold), "<=", 1e-9,
                             data_seed, a0.text()));
    out.push_back(make_check(tag + " verdict " + (c.expected_pass ? "Established" : "NotEstablished"),
                             (rep.verdict == Verdict::Established) == c.expected_pass ? 1.0 : 0.0, "==", 1.0, data_seed,
                             to_string(rep.verdict)));
  }
  Vector y(2);
  y << 0.3, -1.1;
  Matrix x = Matrix::Ones(2, 1);
  const SmnModel ig(y, x, Vector::Zero(1), Matrix::Identity(1, 1), 1.3, 1.0, InvGammaMixing{2.0});
  const ErgodicityReport rig = check_smn(ig, Algorithm::SS);
  const Condition& cig = rig.conditions.front();
  out.push_back(make_check("inverse-gamma SS m=2 threshold - (1+sqrt 2)/2",
                           std::abs(cig.required - (1.0 + std::sqrt(2.0)) / 2.0), "<=", 1e-6, 0, cig.text()));
  const SmnModel st(y, x, Vector::Zero(1), Matrix::Identity(1, 1), 0.5, 1.0, StudentTMixing{4.0});
  const ErgodicityReport rst = check_smn(st, Algorithm::HS);
  out.push_back(make_check("Student's t HS unconditional verdict", rst.verdict == Verdict::Established ? 1.0 : 0.0,
                           "==", 1.0, 0, rst.conditions.front().text()));
  return out;
}

// distributions -------------------------------------------------------------

/// Mean and variance of a scalar sampler against oracle values, each within
/// k standard errors (the variance SE uses the sample fourth central moment).
inline std::vector<CheckResult> scalar_moment_checks(const std::string& name, const std::function<double(RngStream&)>& draw,
                                                     double mean, double variance, std::size_t n, std::uint64_t seed,
                                                     double k_se) {
  RngStream rng(seed, 0);
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = draw(rng);
  const double m = sample_mean(x);
  const Vector dev2 = (x.array() - m).square().matrix();
  const double v = sample_mean(dev2);
  const double nd = static_cast<double>(n);
  const double m4 = sample_mean(squared(dev2));
  return {z_check(name + " mean", m, std::sqrt(variance / nd), mean, k_se, seed),
          z_check(name + " variance", v, std::sqrt(std::max(m4 - v * v, 0.0) / nd), variance, k_se, seed)};
}

inline std::vector<CheckResult> distribution_checks(std::size_t n, std::uint64_t seed, double k_se) {
  std::vector<CheckResult> out;
  std::uint64_t k = 0;
  auto add = [&](const std::vector<CheckResult>& v) { out.insert(out.end(), v.begin(), v.end()); };

  const GigParams gigs[] = {{-0.25, 2.0, 0.5}, {1.5, 1.0, 2.0}, {-1.5, 1.0, 2.0}, {0.3, 0.05, 0.02}, {2.0, 50.0, 30.0}};
  for (const GigParams& g : gigs) {
    const double m1 = gig_moment_numeric(g, 1), m2 = gig_moment_numeric(g, 2);
    const std::string tag = "GIG(" + format_double(g.zeta) + "," + format_double(g.xi) + "," + format_double(g.psi) + ")";
    add(scalar_moment_checks(tag, [&](RngStream& r) { return g.sample(r); }, m1, m2 - m1 * m1, n,
                             check_seed(seed, k++), k_se));
    out.push_back(make_check(tag + " normalization error", std::abs(gig_moment_numeric(g, 0) - 1.0), "<", 1e-6, 0));
  }
  const GammaLaw gammas[] = {{0.3, 2.0}, {2.5, 0.7}, {177.0, 90.0}};
  for (const GammaLaw& g : gammas)
    add(scalar_moment_checks("Gamma(" + format_double(g.shape) + "," + format_double(g.rate) + ")",
                             [&](RngStream& r) { return g.sample(r); }, g.shape / g.rate, g.shape / (g.rate * g.rate), n,
                             check_seed(seed, k++), k_se));
  const FLaw fs[] = {{5.0, 12.0}, {60.0, 30.0}};
  for (const FLaw& f : fs)
    add(scalar_moment_checks("F(" + format_double(f.nu1) + "," + format_double(f.nu2) + ")",
                             [&](RngStream& r) { return f.sample(r); }, f.mean(), f.variance(), n, check_seed(seed, k++),
                             k_se));

  Vector mean(3);
  mean << 1.0, -2.0, 0.5;
  Matrix cov(3, 3);
  cov << 2.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 0.5;
  const MvnLaw mvn(mean, cov);
  const MvnPrecisionLaw mvnp(cov.inverse(), cov.inverse() * mean);
  for (int form = 0; form < 2; ++form) {
    const std::uint64_t s = check_seed(seed, k++);
    RngStream rng(s, 0);
    Matrix draws(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < draws.rows(); ++i)
      draws.row(i) = (form == 0 ? mvn.sample(rng) : mvnp.sample(rng)).transpose();
    const std::string tag = form == 0 ? "MVN(covariance)" : "MVN(precision)";
    const double nd = static_cast<double>(n);
    for (Eigen::Index a = 0; a < 3; ++a) {
      const Vector xa = draws.col(a);
      out.push_back(z_check(tag + " mean[" + std::to_string(a) + "]", sample_mean(xa), std::sqrt(cov(a, a) / nd),
                            mean(a), k_se, s));
      for (Eigen::Index b = a; b < 3; ++b) {
        const Vector prod = ((draws.col(a).array() - mean(a)) * (draws.col(b).array() - mean(b))).matrix();
        out.push_back(z_check(tag + " cov[" + std::to_string(a) + "," + std::to_string(b) + "]", sample_mean(prod),
                              std::sqrt(sample_variance(prod) / nd), cov(a, b), k_se, s));
      }
    }
  }
  return out;
}

// GLMM -------------------------------------------------------------------------

/// Maximum relative difference between the precision-form and partitioned-form
/// (mean, covariance) of theta | lambda, tau over random small instances.
inline CheckResult glmm_block_form_check(std::size_t instances, std::uint64_t seed, double tol = 1e-8) {
  RngStream rng(seed, 0);
  double worst = 0.0;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const auto n = static_cast<Eigen::Index>(12 + static_cast<int>(rng.uniform() * 20));
    const auto p = static_cast<Eigen::Index>(1 + static_cast<int>(rng.uniform() * 8));
    const std::size_t m = rng.uniform() < 0.5 ? 1 : 2;
    std::vector<Matrix> blocks;
    for (std::size_t i = 0; i < m; ++i) {
      const auto qi = static_cast<Eigen::Index>(1 + static_cast<int>(rng.uniform() * 4));
      blocks.push_back(cell_means_design(n, qi));
    }
    Matrix x(n, p);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 2.0 * rng.normal();
    GlmmHyper h;
    h.a.assign(m + 1, 1.5);
    h.b.assign(m + 1, 1.0);
    const GlmmModel model(y, x, blocks, h);
    Vector lambda(static_cast<Eigen::Index>(m + 1)), tau(p);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = std::exp(rng.normal());
    for (Eigen::Index j = 0; j < p; ++j) tau(j) = std::exp(1.5 * rng.normal());
    const MvnPrecisionLaw law = model.theta_law(lambda, tau);
    const GlmmBlockForm blk = glmm_block_form(model, lambda, tau);
    const double dm = (law.mean - blk.mean).cwiseAbs().maxCoeff() / blk.mean.cwiseAbs().maxCoeff();
    const double dc =
        (law.covariance() - blk.covariance).cwiseAbs().maxCoeff() / blk.covariance.cwiseAbs().maxCoeff();
    worst = std::max({worst, dm, dc});
  }
  return make_check("precision form vs partitioned form, max relative difference over " + std::to_string(instances) +
                        " instances",
                    worst, "<=", tol, seed);
}

/// A (theta, tau) pair from the end of a short HS run on a reference setting.
struct GlmmSnapshot {
  GlmmState state;
  Vector tau;
};

inline GlmmSnapshot glmm_snapshot(const GlmmModel& model, std::size_t burn, std::uint64_t seed) {
  const Chain c = run_chain(model, ScanSpec::hs(0.5), burn, seed);
  Kernel<GlmmModel> kernel{model, ScanSpec::hs(0.5)};
  GlmmSnapshot snap;
  snap.state = kernel.read(c.samples.row(c.rows() - 1).data());
  RngStream rng(seed, 99);
  StepCounters counters;
  snap.tau = kernel.draw_latent(snap.state, rng, counters);
  return snap;
}

struct SandwichDrawStats {
  KsResult ks;
  double acceptance;
  double quadrature_acceptance;
  GlmmSandwichParams params;
};

/// Accepted g draws of the group move against the quadrature CDF of the target.
inline SandwichDrawStats glmm_sandwich_draws(const GlmmModel& model, const GlmmSnapshot& snap, std::size_t n_draws,
                                             std::uint64_t seed) {
  SandwichDrawStats out;
  out.params = glmm_sandwich_params(model, snap.state.theta, snap.tau);
  RngStream rng(seed, 0);
  std::uint64_t trials = 0;
  std::vector<double> g(n_draws);
  for (double& v : g) v = glmm_group_move(out.params, rng, &trials);
  const TabulatedCdf cdf =
      tabulate_cdf_log_scale([&](double x) { return out.params.log_target(x); }, out.params.g_hat);
  out.ks = ks_test(g, [&](double x) { return cdf(x); });
  out.acceptance = static_cast<double>(n_draws) / static_cast<double>(trials);
  out.quadrature_acceptance = out.params.acceptance_probability();
  return out;
}

inline std::vector<CheckResult> glmm_sandwich_checks(std::size_t n_draws, std::uint64_t seed, std::uint64_t data_seed) {
  std::vector<CheckResult> out;
  for (int setting = 1; setting <= 3; ++setting) {
    const GlmmModel model = setting_model(setting, data_seed);
    const std::uint64_t s = seed + static_cast<std::uint64_t>(setting);
    const SandwichDrawStats st = glmm_sandwich_draws(model, glmm_snapshot(model, 500, s), n_draws, s);
    const std::string tag = "setting " + std::to_string(setting) + " group move ";
    out.push_back(make_check(tag + "KS p-value", st.ks.p_value, ">=", 0.01, s,
                             "D = " + format_double(st.ks.statistic) + ", s = " + format_double(st.params.s)));
    out.push_back(make_check(tag + "acceptance rate", st.acceptance, ">=", 0.5, s,
                             "quadrature acceptance " + format_double(st.quadrature_acceptance)));
  }
  return out;
}

/// Batch-means asymptotic variance of the GLMM test function: HSS / HS.
struct GlmmOrderingStats {
  double var_hs, var_hss, var_ss, var_rs;
  double ratio;
};

inline GlmmOrderingStats glmm_ordering(const GlmmModel& model, std::size_t iterations, std::uint64_t seed,
                                       bool all_scans = false) {
  RngStream init_rng = init_stream(seed, 0);
  const GlmmState init = model.initial_state(init_rng);
  auto avar = [&](const ScanSpec& scan, std::size_t n) {
    return batch_means_asymp_var(glmm_test_function_series(model, run_chain(model, scan, n, init, seed)));
  };
  GlmmOrderingStats st{};
  st.var_hs = avar(ScanSpec::hs(0.5), iterations);
  st.var_hss = avar(ScanSpec::hss(0.5, true, false), iterations);
  st.ratio = st.var_hss / st.var_hs;
  st.var_ss = all_scans ? avar(ScanSpec::ss(), iterations) : NAN;
  st.var_rs = all_scans ? avar(ScanSpec::rs(), iterations) : NAN;
  return st;
}

inline CheckResult glmm_ordering_check(std::size_t iterations, std::uint64_t seed, std::uint64_t data_seed) {
  const GlmmOrderingStats st = glmm_ordering(setting_model(1, data_seed), iterations, seed);
  return make_check("setting 1 asymptotic variance HSS / HS", st.ratio, "<=", 1.1, seed,
                    "HS " + format_double(st.var_hs) + ", HSS " + format_double(st.var_hss));
}

/// HSS with both moves off against HS: number of differing sample entries.
template <class Model>
CheckResult collapse_check(const std::string& label, const Model& model, std::size_t iterations, std::uint64_t seed) {
  const Chain hs = run_chain(model, ScanSpec::hs(0.5), iterations, seed);
  const Chain hss = run_chain(model, ScanSpec::hss(0.5, false, false), iterations, seed);
  double differing = 0.0;
  for (Eigen::Index i = 0; i < hs.samples.size(); ++i)
    if (std::memcmp(&hs.samples.data()[i], &hss.samples.data()[i], sizeof(double)) != 0) ++differing;
  return make_check(label + " HSS(no moves) vs HS differing entries", differing, "==", 0.0, seed);
}

// ---------------------------------------------------------------------------
// Suites

/// Student's t data with m = 10, for which the posterior fourth moments of
/// (mu, sigma2) exist and batch-means SEs of the second moments are valid.
inline StudentTModel stationarity_model() {
  Vector w(10);
  w << -1.2, 0.3, 0.8, 2.1, -0.4, 0.9, 1.7, -0.1, 0.5, 3.2;
  return StudentTModel(w, 4.0);
}

inline constexpr std::uint64_t kSuiteDataSeed = 101;

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"stationarity", "reversibility", "ordering", "thresholds", "distributions"};
  return names;
}

inline SuiteResult run_suite(const std::string& name, const std::string& budget, std::uint64_t master_seed = 20240601) {
  if (budget != "small" && budget != "full") throw ConfigError("budget must be 'small' or 'full'");
  const bool full = budget == "full";
  SuiteResult r{name, budget, master_seed, {}, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  auto add = [&](const std::vector<CheckResult>& v) { r.checks.insert(r.checks.end(), v.begin(), v.end()); };
  constexpr double k_se = 4.0;

  if (name == "stationarity") {
    const StudentTModel model = stationarity_model();
    const StudentTPosteriorOracle oracle = quadrature_toy_t(model);
    const std::size_t n = full ? 1'000'000 : 200'000;
    add(t_stationarity_checks(model, oracle, {ScanSpec::hs(0.5), ScanSpec::ss(), ScanSpec::rs(), ScanSpec::hss(0.5)}, n,
                              check_seed(master_seed, 0), k_se));
    r.checks.push_back(toy_laplace_moment_check(false, n, check_seed(master_seed, 1), k_se));
    r.checks.push_back(toy_laplace_moment_check(true, n, check_seed(master_seed, 2), k_se));
  } else if (name == "reversibility") {
    add(toy_kernel_symmetry_checks(full ? 15 : 7));
    r.checks.push_back(hastings_check(full ? 50 : 10, check_seed(master_seed, 0)));
  } else if (name == "ordering") {
    add(toy_laplace_ordering_checks(full ? 1'000'000 : 200'000, check_seed(master_seed, 0), 10, 2.0));
    r.checks.push_back(glmm_ordering_check(full ? 60'000 : 20'000, check_seed(master_seed, 1), kSuiteDataSeed));
    r.checks.push_back(collapse_check("setting 1 GLMM", setting_model(1, kSuiteDataSeed), full ? 10'000 : 2'000,
                                      check_seed(master_seed, 2)));
    r.checks.push_back(collapse_check("toy Student's t", stationarity_model(), 10'000, check_seed(master_seed, 3)));
  } else if (name == "thresholds") {
    add(threshold_checks(kSuiteDataSeed));
  } else if (name == "distributions") {
    add(distribution_checks(full ? 100'000 : 20'000, check_seed(master_seed, 0), k_se));
    r.checks.push_back(glmm_block_form_check(full ? 20 : 5, check_seed(master_seed, 1)));
    add(glmm_sandwich_checks(full ? 10'000 : 2'000, check_seed(master_seed, 2), kSuiteDataSeed));
  } else {
    std::string known;
    for (const auto& s : suite_names()) known += (known.empty() ? "" : ", ") + s;
    throw ConfigError("unknown suite '" + name + "'; available suites: " + known);
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace hsg
