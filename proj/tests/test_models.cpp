#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "hsg/diagnostics.hpp"
#include "hsg/oracle.hpp"
#include "hsg/sandwich.hpp"
#include "hsg/scans.hpp"

using namespace hsg;

namespace {

StudentTModel five_point_model() {
  Vector w(5);
  w << -1.2, 0.3, 0.8, 2.1, -0.4;
  return StudentTModel(w, 4.0);
}

GlmmModel small_glmm(std::uint64_t seed, Eigen::Index n = 100, Eigen::Index p = 10, Eigen::Index q = 5, double a0 = 1.0) {
  RngStream rng(seed, 0);
  GlmmDesign d;
  d.x.resize(n, p);
  for (Eigen::Index i = 0; i < d.x.size(); ++i) d.x.data()[i] = rng.normal();
  d.z_blocks.push_back(cell_means_design(n, q));
  d.hyper.a = {a0, 1.5};
  d.hyper.b = {a0, 1.0};
  const GlmmSimulation sim = simulate_glmm_bottom_up(d, rng);
  return GlmmModel(sim.y, d.x, d.z_blocks, d.hyper);
}

double mc_z(const Vector& x, double truth) {
  return std::abs(sample_mean(x) - truth) / std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

/// Largest spread of log(normalized a) - log(normalized b) over a grid, given
/// the unnormalized logs on that grid (equal spacing, so normalizing by sums).
double log_shape_mismatch(const std::vector<double>& la, const std::vector<double>& lb) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < la.size(); ++i) {
    lo = std::min(lo, la[i] - lb[i]);
    hi = std::max(hi, la[i] - lb[i]);
  }
  return hi - lo;
}

}  // namespace

// --- Student's t model ---------------------------------------------------------

TEST(StudentTModel, LatentShapesAreHalfNuPlusOne) {
  Vector w(5);
  w << -1, 0, 1, 2, -2;
  const StudentTModel model(w, 4.0);
  const TConditionals c = model.conditionals({0.0, 1.0}, std::nullopt);
  ASSERT_EQ(c.latent.size(), 5u);
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(c.latent[static_cast<std::size_t>(i)].shape, 2.5);
    EXPECT_DOUBLE_EQ(c.latent[static_cast<std::size_t>(i)].rate, 0.5 * (w(i) * w(i) + 4.0));
  }
}

TEST(StudentTModel, ZeroResidualLatentsRevertToPrior) {
  const StudentTModel model(Vector::Constant(4, 1.3), 3.0);
  for (const GammaLaw& g : model.conditionals({1.3, 2.0}, std::nullopt).latent) EXPECT_DOUBLE_EQ(g.rate, 1.5);
}

TEST(StudentTModel, NonPositiveSigma2IsDomainError) {
  EXPECT_THROW(five_point_model().conditionals({0.0, 0.0}, std::nullopt), DomainError);
  EXPECT_THROW(five_point_model().conditionals({0.0, -1.0}, std::nullopt), DomainError);
}

TEST(StudentTModel, ConditionalMomentsMatchQuadratureOfJoint) {
  Vector w(3);
  w << -0.7, 0.4, 1.5;
  Vector z(3);
  z << 0.8, 1.3, 0.5;
  for (const StudentTModel& model : {StudentTModel(w, 4.0), StudentTModel(w, 4.0, NormalMeanPrior{0.5})}) {
    const double sigma2 = 1.7, mu = 0.2;
    const NormalLaw mu_law = model.conditionals({mu, sigma2}, z).mu.value();
    auto mu_moment = [&](int k) {
      return integrate_exp(
          [&](double m) { return model.log_joint(m, sigma2, z) + (k ? std::log(std::abs(m) + 1e-300) * k : 0.0); },
          mu_law.mean);
    };
    const double log_mass = mu_moment(0).log_value;
    const double second = std::exp(mu_moment(2).log_value - log_mass);
    EXPECT_NEAR(second / (mu_law.variance + mu_law.mean * mu_law.mean), 1.0, 1e-3);

    const InvGammaLaw s2_law = model.conditionals({mu, sigma2}, z).sigma2.value();
    auto s2_moment = [&](int k) {
      return integrate_exp([&](double t) { return model.log_joint(mu, std::exp(t), z) + (k + 1) * t; },
                           std::log(s2_law.mean()));
    };
    const double s2_mean = std::exp(s2_moment(1).log_value - s2_moment(0).log_value);
    EXPECT_NEAR(s2_mean / s2_law.mean(), 1.0, 1e-3);
  }
}

TEST(StudentTModel, NeedsTwoObservations) {
  EXPECT_THROW(StudentTModel(Vector::Ones(1), 4.0), PreconditionError);
  EXPECT_THROW(StudentTModel(Vector::Ones(3), 0.0), DomainError);
}

// --- GLMM model --------------------------------------------------------------

TEST(GlmmModel, PrecisionFormEqualsPartitionedForm) {
  const GlmmModel model = small_glmm(3);
  RngStream rng(4);
  Vector lambda(2), tau(10);
  lambda << 0.7, 2.3;
  for (Eigen::Index j = 0; j < 10; ++j) tau(j) = std::exp(rng.normal());
  const MvnPrecisionLaw law = model.theta_law(lambda, tau);
  const GlmmBlockForm blk = glmm_block_form(model, lambda, tau);
  EXPECT_LT((law.mean - blk.mean).cwiseAbs().maxCoeff() / blk.mean.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((law.covariance() - blk.covariance).cwiseAbs().maxCoeff() / blk.covariance.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(GlmmModel, ZeroBetaClampsGigPsiAndFlagsIt) {
  const GlmmModel model = small_glmm(5);
  GlmmState s{Vector::Zero(15), Vector::Ones(2)};
  const GlmmConditionals c = model.conditionals(s, std::nullopt);
  EXPECT_EQ(c.psi_clamps, 10);
  for (const GigParams& g : c.tau) {
    EXPECT_EQ(g.psi, kGigPsiFloor);
    EXPECT_DOUBLE_EQ(g.zeta, -0.25);
    EXPECT_DOUBLE_EQ(g.xi, 2.0);
  }
  RngStream rng(6);
  EXPECT_GT(c.tau.front().sample(rng), 0.0);
}

TEST(GlmmModel, Lambda0ShapeForSettingTwo) {
  const GlmmModel model = small_glmm(7, 100, 100, 5, 77.0);
  const auto laws = model.lambda_laws(Vector::Ones(105), Vector::Ones(100));
  EXPECT_DOUBLE_EQ(laws[0].shape, 177.0);
  EXPECT_DOUBLE_EQ(laws[1].shape, 0.5 * 5 + 1.5);
}

TEST(GlmmModel, BadHyperparametersAreRejected) {
  GlmmHyper h;
  h.a = {1.0};
  h.b = {1.0};
  EXPECT_THROW(GlmmModel(Vector::Zero(10), Matrix::Ones(10, 2), {cell_means_design(10, 2)}, h), PreconditionError);
  h.a = {1.0, -1.0};
  h.b = {1.0, 1.0};
  EXPECT_THROW(GlmmModel(Vector::Zero(10), Matrix::Ones(10, 2), {cell_means_design(10, 2)}, h), DomainError);
}

TEST(GlmmSimulation, SettingOneShapes) {
  RngStream rng(8);
  const GlmmDesign d = table1_design(1, rng);
  EXPECT_EQ(d.x.rows(), 100);
  EXPECT_EQ(d.x.cols(), 10);
  EXPECT_EQ(d.z_blocks.front().cols(), 5);
  const GlmmSimulation sim = simulate_glmm_bottom_up(d, rng);
  EXPECT_EQ(sim.y.size(), 100);
  EXPECT_TRUE(sim.y.allFinite());
  EXPECT_TRUE((sim.truth.tau.array() > 0).all() && (sim.truth.lambda.array() > 0).all());
}

TEST(GlmmSimulation, SettingThreeRunsTheSampler) {
  RngStream rng(9);
  const GlmmDesign d = table1_design(3, rng);
  const GlmmSimulation sim = simulate_glmm_bottom_up(d, rng);
  const GlmmModel model(sim.y, d.x, d.z_blocks, d.hyper);
  const Chain c = run_chain(model, ScanSpec::hs(0.5), 50, 10);
  EXPECT_TRUE(c.samples.allFinite());
}

TEST(GlmmSimulation, FixedSeedIsDeterministic) {
  auto make = [] {
    RngStream rng(11);
    const GlmmDesign d = table1_design(2, rng);
    return simulate_glmm_bottom_up(d, rng).y;
  };
  const Vector a = make(), b = make();
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())), 0);
}

TEST(GlmmSimulation, UnknownSettingIsConfigError) { EXPECT_THROW(table1_setting(4), ConfigError); }

// --- SMN model ---------------------------------------------------------------

TEST(SmnModel, StudentTMixingLatentLaw) {
  Vector y(3);
  y << 1.0, 0.0, 2.0;
  const SmnModel model(y, Matrix::Zero(3, 1), Vector::Zero(1), Matrix::Identity(1, 1), 2.0, 1.0, StudentTMixing{4.0});
  const auto law = std::get<GammaLaw>(model.latent_law(1.0, 1.0));
  EXPECT_DOUBLE_EQ(law.shape, 2.5);
  EXPECT_DOUBLE_EQ(law.rate, 2.5);
}

TEST(SmnModel, InverseGammaMixingLatentLaw) {
  const SmnModel model(Vector::Ones(3), Matrix::Zero(3, 1), Vector::Zero(1), Matrix::Identity(1, 1), 2.0, 1.0,
                       InvGammaMixing{2.0});
  const auto law = std::get<GigParams>(model.latent_law(1.0, 1.0));
  EXPECT_DOUBLE_EQ(law.zeta, -1.5);
  EXPECT_DOUBLE_EQ(law.xi, 1.0);
  EXPECT_DOUBLE_EQ(law.psi, 2.0);
}

TEST(SmnModel, PriorDominatedMeanApproachesPriorMean) {
  RngStream rng(12);
  Matrix x(20, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Vector y(20);
  for (Eigen::Index i = 0; i < 20; ++i) y(i) = 3.0 + rng.normal();
  Vector prior_mean(2);
  prior_mean << -1.0, 0.5;
  const SmnModel model(y, x, prior_mean, Matrix::Identity(2, 2), 2.0, 1.0, StudentTMixing{4.0});
  EXPECT_LT((model.mu_prime(1e12, Vector::Ones(20)) - prior_mean).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(SmnModel, ExpectedLatentStudentT) {
  const SmnModel model(Vector::Zero(2), Matrix::Zero(2, 1), Vector::Zero(1), Matrix::Identity(1, 1), 2.0, 1.0,
                       StudentTMixing{4.0});
  EXPECT_DOUBLE_EQ(expected_latent(model, Vector::Zero(1), 1.0)(0), 5.0 / 4.0);
  const SmnModel shifted(Vector::Constant(2, 2.0), Matrix::Zero(2, 1), Vector::Zero(1), Matrix::Identity(1, 1), 2.0,
                         1.0, StudentTMixing{4.0});
  EXPECT_DOUBLE_EQ(expected_latent(shifted, Vector::Zero(1), 1.0)(0), 0.625);
}

TEST(SmnModel, ExpectedLatentInverseGammaMatchesMonteCarlo) {
  const SmnModel model(Vector::Constant(2, std::sqrt(2.0)), Matrix::Zero(2, 1), Vector::Zero(1),
                       Matrix::Identity(1, 1), 2.0, 1.0, InvGammaMixing{2.0});
  const double closed = expected_latent(model, Vector::Zero(1), 1.0)(0);
  EXPECT_NEAR(closed, bessel_k(0.5, 2.0) / bessel_k(-1.5, 2.0), 1e-12);
  RngStream rng(13);
  const GigParams g{-1.5, 2.0, 2.0};
  Vector x(1'000'000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g.sample(rng);
  EXPECT_LT(mc_z(x, closed), 4.0);
}

TEST(SmnModel, ExpectedLatentCustomMixingIsUnsupported) {
  CustomMixing h{[](double z) { return -z; }, [](RngStream& r) { return r.exponential(); }};
  const SmnModel model(Vector::Ones(2), Matrix::Zero(2, 1), Vector::Zero(1), Matrix::Identity(1, 1), 2.0, 1.0, h);
  EXPECT_THROW(expected_latent(model, Vector::Zero(1), 1.0), UnsupportedError);
}

TEST(SmnModel, CustomMixingRejectionCapIsReported) {
  CustomMixing h{[](double z) { return -z; }, [](RngStream&) { return 1e9; }};
  const SmnModel model(Vector::Ones(2), Matrix::Zero(2, 1), Vector::Zero(1), Matrix::Identity(1, 1), 2.0, 1.0, h);
  RngStream rng(14);
  EXPECT_THROW(sample_latent(model.latent_law(3.0, 1.0), rng), RejectionCapError);
}

// --- toy Laplace ---------------------------------------------------------------

TEST(ToyLaplace, LatentGivenZeroIsSymmetric) {
  RngStream rng(15);
  const ToyLatentLaw law = ToyLatentLaw::given(0.0);
  Vector z(100000);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = law.sample(rng);
  EXPECT_LT(mc_z(z, 0.0), 4.0);
}

TEST(ToyLaplace, ComposedLatentIsStandardLaplace) {
  RngStream rng(16);
  const ToyLaplaceModel model;
  Vector z(100000);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double u = model.initial_state(rng).u;
    z(i) = model.z_law(u).sample(rng);
  }
  const Vector z2 = z.array().square().matrix();
  EXPECT_LT(mc_z(z2, 2.0), 4.0);
}

TEST(ToyLaplace, LatentLawIsNormalized) {
  for (double u : {-4.0, -0.3, 0.0, 1.0, 6.0}) {
    const ToyLatentLaw law = ToyLatentLaw::given(u);
    const LogIntegral li = integrate_exp([&](double z) { return law.log_pdf(z); }, u);
    EXPECT_NEAR(li.log_value, 0.0, 1e-9) << "u " << u;
  }
}

TEST(ToyLaplace, DaChainSecondMoment) {
  const Chain c = run_chain(ToyLaplaceModel{}, ScanSpec::da(false), 200'000, 17);
  const Vector u2 = c.kept("u").array().square().matrix();
  EXPECT_LT(std::abs(sample_mean(u2) - 3.0) / batch_means_se(u2), 4.0);
}

// --- sandwich moves ------------------------------------------------------------

TEST(TGroupMove, MuMoveMean) {
  Vector w(5);
  w << 0, 1, 2, 3, 4;
  const TLatentStats z = TLatentStats::from(Vector::Constant(5, 2.0), w);
  RngStream rng(18);
  Vector g(100000);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = t_group_move_mu(z, 4.0, 5, rng);
  EXPECT_LT(mc_z(g, 0.5), 4.0);
}

TEST(TGroupMove, MuMoveReadsOnlyLatentSum) {
  Vector w(5);
  w << 0, 1, 2, 3, 4;
  Vector spread(5);
  spread << 1e6 - 4, 1, 1, 1, 1;
  const GammaLaw a = t_group_move_mu_law(TLatentStats::from(Vector::Constant(5, 2e5), w), 4.0, 5);
  const GammaLaw b = t_group_move_mu_law(TLatentStats::from(spread, w), 4.0, 5);
  EXPECT_DOUBLE_EQ(a.shape, b.shape);
  EXPECT_DOUBLE_EQ(a.rate, b.rate);
}

TEST(TGroupMove, MuMoveDensityIsProportionalToScaledLatentDensity) {
  const StudentTModel model = five_point_model();
  Vector z(5);
  z << 0.4, 1.7, 0.9, 1.2, 0.6;
  const double mu = 0.3;
  const GammaLaw law = t_group_move_mu_law(TLatentStats::from(z, model.w()), model.nu(), model.m());
  std::vector<double> lhs, rhs;
  for (int i = 1; i <= 50; ++i) {
    const double g = 0.05 * i;
    const Vector gz = g * z;
    const double log_fz = integrate_exp([&](double t) { return model.log_joint(mu, std::exp(t), gz) + t; }, 0.0).log_value;
    lhs.push_back(law.log_pdf(g));
    rhs.push_back(log_fz + 4.0 * std::log(g));
  }
  EXPECT_LT(log_shape_mismatch(lhs, rhs), 1e-8);
}

TEST(TGroupMove, SigmaMoveShapeAndZeroScatterRate) {
  Vector w(2);
  w << 1.0, 1.0;
  const TLatentStats z = TLatentStats::from(Vector::Constant(2, 1.5), w);
  const GammaLaw law = t_group_move_sigma_law(z, 0.7, 2.0, 2);
  EXPECT_DOUBLE_EQ(law.shape, 2.5);
  EXPECT_DOUBLE_EQ(law.rate, z.z_dot * 2.0 / 2.0);
}

TEST(TGroupMove, SigmaMoveDensityIsProportionalToScaledLatentDensity) {
  const StudentTModel model = five_point_model();
  Vector z(5);
  z << 0.4, 1.7, 0.9, 1.2, 0.6;
  const double sigma2 = 1.4;
  const GammaLaw law = t_group_move_sigma_law(TLatentStats::from(z, model.w()), sigma2, model.nu(), model.m());
  std::vector<double> lhs, rhs;
  for (int i = 1; i <= 50; ++i) {
    const double g = 0.05 * i;
    const Vector gz = g * z;
    const double log_fz = integrate_exp([&](double mu) { return model.log_joint(mu, sigma2, gz); }, 0.5).log_value;
    lhs.push_back(law.log_pdf(g));
    rhs.push_back(log_fz + 4.0 * std::log(g));
  }
  EXPECT_LT(log_shape_mismatch(lhs, rhs), 1e-8);
}

TEST(GlmmGroupMove, MidpointForSettingOne) {
  EXPECT_DOUBLE_EQ(choose_s(100, 10, 0.25, 1, 2.0, 3.0, 1.0, SChoice::Midpoint), 26.75);
}

TEST(GlmmGroupMove, LowerEndpointAtHalfC) {
  const GlmmSandwichParams p = detail::glmm_params_for_s(100, 10, 0.5, 1, 2.0, 3.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(p.s_lower, 0.0);
}

TEST(GlmmGroupMove, EveryChoiceGivesPositiveDegreesOfFreedom) {
  for (SChoice choice : {SChoice::ModeMatch, SChoice::Midpoint, SChoice::GridSearch})
    for (double c : {0.1, 0.25, 0.45})
      for (double p : {10.0, 100.0, 200.0}) {
        const double s = choose_s(100, p, c, 1.0 + p, 50.0, 20.0, 1.0, choice);
        const GlmmSandwichParams g = detail::glmm_params_for_s(100, p, c, 1.0 + p, 50.0, 20.0, 1.0, s);
        EXPECT_NO_THROW(g.validate());
      }
}

TEST(GlmmGroupMove, AcceptanceRatioIsOneAtItsMaximizer) {
  const GlmmSandwichParams p = detail::glmm_params_for_s(100, 10, 0.25, 1, 2.0, 3.0, 1.0, 20.0);
  EXPECT_EQ(p.log_accept_ratio(p.g_hat), 0.0);
  EXPECT_LT(p.log_accept_ratio(p.g_hat * 1.1), 0.0);
  EXPECT_LT(p.log_accept_ratio(p.g_hat * 0.9), 0.0);
}

TEST(GlmmGroupMove, AcceptedDrawsFollowTheTarget) {
  const GlmmModel model = small_glmm(19);
  const Chain c = run_chain(model, ScanSpec::hs(0.5), 300, 20);
  Kernel<GlmmModel> kernel{model, ScanSpec::hs(0.5)};
  const GlmmState state = kernel.read(c.samples.row(c.rows() - 1).data());
  RngStream rng(21);
  StepCounters counters;
  const Vector tau = kernel.draw_latent(state, rng, counters);
  const GlmmSandwichParams params = glmm_sandwich_params(model, state.theta, tau);
  std::uint64_t trials = 0;
  std::vector<double> g(4000);
  for (double& v : g) v = glmm_group_move(params, rng, &trials);
  const TabulatedCdf cdf = tabulate_cdf_log_scale([&](double x) { return params.log_target(x); }, params.g_hat);
  EXPECT_GT(ks_test(g, [&](double x) { return cdf(x); }).p_value, 0.01);
  EXPECT_GT(4000.0 / static_cast<double>(trials), 0.5);
}

TEST(GlmmGroupMove, RejectionCapIsReported) {
  GlmmSandwichParams p = detail::glmm_params_for_s(100, 10, 0.25, 1, 2.0, 3.0, 1.0, 20.0);
  p.tau_sum *= 1e6;
  RngStream rng(22);
  EXPECT_THROW(glmm_group_move(p, rng, nullptr, 50), RejectionCapError);
}

TEST(ToyLaplaceMove, StaysOnItsHalfLine) {
  RngStream rng(23);
  Vector pos(100000);
  for (Eigen::Index i = 0; i < pos.size(); ++i) {
    pos(i) = toy_laplace_sandwich_move(2.0, rng);
    ASSERT_GT(pos(i), 0.0);
    ASSERT_LE(toy_laplace_sandwich_move(-1.0, rng), 0.0);
    ASSERT_LE(toy_laplace_sandwich_move(0.0, rng), 0.0);
  }
  EXPECT_LT(mc_z(pos, 1.0), 4.0);
}

TEST(ToyLaplaceMove, DetailedBalanceOnGrid) {
  auto f = [](double z) { return 0.5 * std::exp(-std::abs(z)); };
  for (double a = -3.0; a <= 3.0; a += 0.25)
    for (double b = -3.0; b <= 3.0; b += 0.25)
      EXPECT_NEAR(toy_laplace_move_density(b, a) * f(a), toy_laplace_move_density(a, b) * f(b), 1e-12);
}

// --- scans -----------------------------------------------------------------------

TEST(Scans, SelectionProbabilityMustBeInsideUnitInterval) {
  EXPECT_THROW(run_chain(five_point_model(), ScanSpec::hs(1.0), 10, 1), ConfigError);
  EXPECT_THROW(run_chain(five_point_model(), ScanSpec::hss(0.0), 10, 1), ConfigError);
  EXPECT_THROW(run_chain(five_point_model(), ScanSpec::rs(0.5, 0.5, 0.5), 10, 1), ConfigError);
}

TEST(Scans, ScanModelMismatchIsConfigError) {
  EXPECT_THROW(run_chain(small_glmm(24), ScanSpec::da(false), 10, 1), ConfigError);
  EXPECT_THROW(run_chain(ToyLaplaceModel{}, ScanSpec::hs(0.5), 10, 1), ConfigError);
}

TEST(Scans, HssWithoutMovesIsBitIdenticalToHs) {
  const StudentTModel model = five_point_model();
  const Chain hs = run_chain(model, ScanSpec::hs(0.5), 5000, 25);
  const Chain hss = run_chain(model, ScanSpec::hss(0.5, false, false), 5000, 25);
  ASSERT_EQ(hs.samples.size(), hss.samples.size());
  EXPECT_EQ(std::memcmp(hs.samples.data(), hss.samples.data(), sizeof(double) * static_cast<std::size_t>(hs.samples.size())),
            0);
}

TEST(Scans, OneHsStepPreservesTheMuMarginal) {
  const StudentTModel model = five_point_model();
  const StudentTPosteriorOracle oracle = quadrature_toy_t(model);
  RngStream rng(26);
  std::vector<double> mu(5000);
  for (double& v : mu) v = step(model, oracle.draw(rng), ScanSpec::hs(0.5), rng).mu;
  EXPECT_GT(ks_test(mu, [&](double x) { return oracle.mu_cdf(x); }).p_value, 0.01);
}

TEST(Scans, ZeroIterationsIsPreconditionError) {
  EXPECT_THROW(run_chain(five_point_model(), ScanSpec::ss(), 0, 1), PreconditionError);
}

TEST(Scans, GlmmSettingOneChainStaysPositive) {
  const GlmmModel model = small_glmm(27);
  const Chain c = run_chain(model, ScanSpec::hs(0.5), 5000, 28);
  EXPECT_EQ(c.rows(), 5000);
  const Eigen::Index k = model.p() + model.q();
  EXPECT_TRUE((c.samples.middleCols(k, 2).array() > 0.0).all());
  EXPECT_TRUE(c.samples.allFinite());
}

TEST(Scans, UpdatesPerIteration) {
  EXPECT_EQ(ScanSpec::ss().updates_per_iteration(), 3);
  EXPECT_EQ(ScanSpec::hs().updates_per_iteration(), 2);
  EXPECT_EQ(ScanSpec::hss().updates_per_iteration(), 2);
  EXPECT_EQ(ScanSpec::rs().updates_per_iteration(), 1);
  EXPECT_EQ(ScanSpec::da().updates_per_iteration(), 2);
}

TEST(Scans, ConditionalDrawCountsMatchTheScan) {
  const StudentTModel model = five_point_model();
  for (const ScanSpec& s : {ScanSpec::ss(), ScanSpec::hs(), ScanSpec::rs(), ScanSpec::hss()}) {
    const Chain c = run_chain(model, s, 1000, 29);
    EXPECT_EQ(c.meta.counters.conditional_draws, 1000u * static_cast<unsigned>(s.updates_per_iteration()))
        << s.describe();
  }
}

TEST(Scans, LagNormalization) {
  EXPECT_EQ(lag_normalize(3, ScanKind::SS), 6u);
  EXPECT_EQ(lag_normalize(3, ScanKind::HS), 9u);
  EXPECT_EQ(lag_normalize(3, ScanKind::HSS), 9u);
  EXPECT_EQ(lag_normalize(3, ScanKind::RS), 18u);
  EXPECT_EQ(lag_normalize(1, ScanKind::SS), 2u);
  EXPECT_EQ(lag_normalize(1, ScanKind::RS), 6u);
  EXPECT_THROW(lag_normalize(0, ScanKind::SS), PreconditionError);
  EXPECT_THROW(lag_normalize(2, ScanKind::DA), UnsupportedError);
}

TEST(Scans, FailingStepAbortsWithIterationIndex) {
  CustomMixing h{[](double z) { return -z; }, [](RngStream&) { return 1e9; }};
  const SmnModel model(Vector::Constant(5, 3.0), Matrix::Zero(5, 1), Vector::Zero(1), Matrix::Identity(1, 1), 2.0, 1.0,
                       h);
  try {
    run_chain(model, ScanSpec::ss(), 10, 30);
    FAIL() << "expected StepError";
  } catch (const StepError& e) {
    EXPECT_EQ(e.iteration(), 0u);
  }
  RunOptions keep;
  keep.keep_partial = true;
  const Chain partial = run_chain(model, ScanSpec::ss(), 10, 30, keep);
  EXPECT_TRUE(partial.meta.aborted);
  EXPECT_EQ(partial.rows(), 0);
}

TEST(Scans, ParallelChainsMatchSerialChains) {
  const StudentTModel model = five_point_model();
  const auto chains = run_chains(model, ScanSpec::hs(), 500, 31, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    RunOptions o;
    o.chain_index = i;
    const Chain serial = run_chain(model, ScanSpec::hs(), 500, 31, o);
    EXPECT_EQ(std::memcmp(serial.samples.data(), chains[i].samples.data(), sizeof(double) * 1000), 0);
  }
}

// --- oracle ------------------------------------------------------------------------

TEST(Oracle, SymmetricDataGiveZeroMean) {
  Vector w(3);
  w << -1.5, 0.0, 1.5;
  const StudentTPosteriorOracle o = quadrature_toy_t(StudentTModel(w, 4.0));
  EXPECT_NEAR(o.mean_mu, 0.0, 1e-9);
  EXPECT_TRUE(o.mean_mu_finite);
  EXPECT_FALSE(o.var_mu_finite);
  EXPECT_FALSE(o.mean_sigma2_finite);
  EXPECT_TRUE(std::isinf(o.mean_sigma2));
}

TEST(Oracle, GridRefinementIsConverged) {
  const StudentTPosteriorOracle o = quadrature_toy_t(five_point_model());
  EXPECT_LT(o.richardson_rel_change, 1e-6);
  EXPECT_LT(o.boundary_leak, 1e-8);
  EXPECT_FALSE(o.var_sigma2_finite);
}

TEST(Oracle, FiniteFourthMomentsForLargerData) {
  Vector w(10);
  w << -1.2, 0.3, 0.8, 2.1, -0.4, 0.9, 1.7, -0.1, 0.5, 3.2;
  const StudentTPosteriorOracle o = quadrature_toy_t(StudentTModel(w, 4.0));
  EXPECT_TRUE(o.var_sigma2_finite);
  EXPECT_GT(o.var_sigma2, 0.0);
}

TEST(Oracle, ToyLaplaceMoments) {
  const ToyLaplaceOracle o = quadrature_toy_laplace(15);
  EXPECT_NEAR(o.mean_u, 0.0, 1e-9);
  EXPECT_NEAR(o.mean_u2, 3.0, 1e-8);
  EXPECT_NEAR(o.mean_u2_2d, 3.0, 1e-6);
  EXPECT_LT(o.max_asymmetry, 1e-6);
}

TEST(Oracle, HastingsIdentityPair) {
  HastingsPair p{TBlock::Location, 0.4, 0.4, 1.2};
  EXPECT_EQ(hastings_ratio(five_point_model(), p), 1.0);
}

TEST(Oracle, HastingsRatioOnBothSlices) {
  Vector w(3);
  w << -0.7, 0.4, 1.5;
  const StudentTModel model(w, 4.0);
  std::vector<HastingsPair> pairs;
  for (double a : {-0.5, 0.5, 1.5})
    for (double b : {-1.0, 1.0}) pairs.push_back({TBlock::Location, a, b, 0.8});
  for (double a : {0.3, 2.0})
    for (double b : {0.7, 4.0}) pairs.push_back({TBlock::Scale, a, b, 0.2});
  EXPECT_LT(hastings_ratio_check(model, pairs), 1e-6);
}

TEST(Oracle, GigMomentMatchesSampler) {
  const GigParams g{-0.25, 2.0, 1.0};
  RngStream rng(32);
  Vector x(100000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g.sample(rng);
  EXPECT_LT(mc_z(x, gig_moment_numeric(g, 1)), 4.0);
}

TEST(Oracle, LargeDataIsRejected) {
  EXPECT_THROW(quadrature_toy_t(StudentTModel(Vector::LinSpaced(11, 0, 1), 4.0)), PreconditionError);
}
