#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "hsg/distributions.hpp"
#include "hsg/errors.hpp"
#include "hsg/models/student_t.hpp"
#include "hsg/models/toy_laplace.hpp"
#include "hsg/quadrature.hpp"
#include "hsg/sandwich.hpp"

namespace hsg {

/// Raised when an integration grid cannot be widened enough to contain the
/// integrand's mass.
class GridTooSmallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class AxisTransform {
  Identity,
  Log,           // node t, variable e^t
  Standardized,  // node x, variable center + x * sqrt(scale variable)
};

struct GridAxis {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t points = 0;
  AxisTransform transform = AxisTransform::Identity;

  double step() const { return (upper - lower) / static_cast<double>(points - 1); }
  double node(std::size_t i) const { return lower + step() * static_cast<double>(i); }
  void validate() const {
    if (points < 32) throw PreconditionError("grid axes need at least 32 points");
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower))
      throw PreconditionError("grid bounds must be finite with upper > lower");
  }
};

/// Grid for the (mu, sigma2) posterior. The scale axis is t = log sigma2; the
/// location axis is x = (mu - c(t)) / s(t) with s(t) = (1/sigma2 + k)^{-1/2}
/// and c(t) the precision-weighted blend of `center` and `prior_center`, where
/// k is the prior precision of mu (0 for the flat prior). This keeps the
/// conditional spread of mu at O(1) in x for every sigma2.
struct GridSpec {
  GridAxis location;
  GridAxis scale;
  double center = 0.0;
  double prior_center = 0.0;
  double prior_precision = 0.0;

  double loc_scale(double t) const { return 1.0 / std::sqrt(std::exp(-t) + prior_precision); }
  double loc_center(double t) const {
    const double a = std::exp(-t);
    return (a * center + prior_precision * prior_center) / (a + prior_precision);
  }
  double mu_at(double t, double x) const { return loc_center(t) + loc_scale(t) * x; }
};

/// Normalized posterior summaries of the Student's t model from 2-D quadrature,
/// plus tables for approximately exact posterior draws.
struct StudentTPosteriorOracle {
  double mean_mu = 0.0;
  double var_mu = 0.0;
  double mean_sigma2 = 0.0;
  double var_sigma2 = 0.0;
  bool mean_mu_finite = true;
  bool var_mu_finite = true;
  bool mean_sigma2_finite = true;
  bool var_sigma2_finite = true;
  GridSpec grid;
  double boundary_leak = 0.0;          // largest boundary mass fraction of the accepted grid
  double richardson_rel_change = 0.0;  // relative change of E[sigma2] (or E[log sigma2]) under grid halving

  std::vector<double> row_cdf;               // cumulative mass over t rows
  std::vector<std::vector<double>> x_cdf;    // per-row cumulative mass over x

  /// Draw (mu, sigma2): t row by inverse CDF, x within the row by inverse CDF,
  /// each jittered uniformly within its cell.
  StudentTState draw(RngStream& rng) const {
    const std::size_t i = pick(row_cdf, rng.uniform());
    const std::size_t j = pick(x_cdf[i], rng.uniform());
    const double t = grid.scale.node(i) + (rng.uniform() - 0.5) * grid.scale.step();
    const double x = grid.location.node(j) + (rng.uniform() - 0.5) * grid.location.step();
    return {grid.mu_at(t, x), std::exp(t)};
  }

  /// Marginal posterior CDF of mu.
  double mu_cdf(double v) const {
    double total = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < row_cdf.size(); ++i) {
      const double w = row_cdf[i] - prev;
      prev = row_cdf[i];
      if (w <= 0.0) continue;
      const double t = grid.scale.node(i);
      total += w * interp_cdf(x_cdf[i], (v - grid.loc_center(t)) / grid.loc_scale(t));
    }
    return std::clamp(total, 0.0, 1.0);
  }

 private:
  static std::size_t pick(const std::vector<double>& cdf, double u) {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    return it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
  }
  double interp_cdf(const std::vector<double>& cdf, double x) const {
    const double pos = (x - grid.location.lower) / grid.location.step();
    if (pos <= -0.5) return 0.0;
    if (pos >= static_cast<double>(cdf.size()) - 0.5) return 1.0;
    // cdf[j] is the mass of cells 0..j, cell j spanning node j +- step/2
    const double shifted = pos + 0.5;
    const auto j = static_cast<std::size_t>(std::floor(shifted));
    const double frac = shifted - static_cast<double>(j);
    const double before = j == 0 ? 0.0 : cdf[j - 1];
    const double after = j < cdf.size() ? cdf[j] : 1.0;
    return before + frac * (after - before);
  }
};

namespace detail {

struct TGridSums {
  double mass = 0.0, mu = 0.0, mu2 = 0.0, s2 = 0.0, s4 = 0.0, log_s2 = 0.0;
  // boundary fractions of the mass per side
  double leak_x_lo = 0.0, leak_x_hi = 0.0, leak_t_lo = 0.0, leak_t_hi = 0.0;
  // upper-t boundary fractions of the |mu|, mu^2, sigma2 and sigma2^2 integrands
  std::array<double, 4> moment_leak_t_hi{};
  std::vector<std::vector<double>> cell;  // unnormalized cell masses (row = t)
};

inline TGridSums t_grid_sums(const StudentTModel& model, const GridSpec& g, bool keep_cells) {
  const std::size_t nt = g.scale.points, nx = g.location.points;
  std::vector<double> logf(nt * nx);
  double peak = -INFINITY;
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = g.scale.node(i);
    const double jac = t + std::log(g.loc_scale(t));
    for (std::size_t j = 0; j < nx; ++j) {
      const double mu = g.mu_at(t, g.location.node(j));
      const double v = model.log_posterior(mu, std::exp(t)) + jac;
      logf[i * nx + j] = v;
      peak = std::max(peak, v);
    }
  }
  TGridSums s;
  if (keep_cells) s.cell.assign(nt, std::vector<double>(nx, 0.0));
  double bx_lo = 0.0, bx_hi = 0.0, bt_lo = 0.0, bt_hi = 0.0;
  std::array<double, 4> moment_total{}, moment_edge{};
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = g.scale.node(i);
    const double sigma2 = std::exp(t);
    const double wt = (i == 0 || i + 1 == nt) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < nx; ++j) {
      const double wx = (j == 0 || j + 1 == nx) ? 0.5 : 1.0;
      const double f = std::exp(logf[i * nx + j] - peak) * wt * wx;
      const double mu = g.mu_at(t, g.location.node(j));
      const std::array<double, 4> moments{f * std::abs(mu), f * mu * mu, f * sigma2, f * sigma2 * sigma2};
      s.mass += f;
      s.mu += f * mu;
      s.mu2 += moments[1];
      s.s2 += moments[2];
      s.s4 += moments[3];
      s.log_s2 += f * t;
      if (keep_cells) s.cell[i][j] = f;
      for (std::size_t k = 0; k < 4; ++k) moment_total[k] += moments[k];
      if (j == 0) bx_lo += f;
      if (j + 1 == nx) bx_hi += f;
      if (i == 0) bt_lo += f;
      if (i + 1 == nt) {
        bt_hi += f;
        for (std::size_t k = 0; k < 4; ++k) moment_edge[k] += moments[k];
      }
    }
  }
  s.leak_x_lo = bx_lo / s.mass;
  s.leak_x_hi = bx_hi / s.mass;
  s.leak_t_lo = bt_lo / s.mass;
  s.leak_t_hi = bt_hi / s.mass;
  for (std::size_t k = 0; k < 4; ++k) s.moment_leak_t_hi[k] = moment_edge[k] / moment_total[k];
  return s;
}

inline void widen(GridAxis& a, bool low, double amount) {
  const double h = a.step();
  const auto extra = static_cast<std::size_t>(std::ceil(amount / h));
  if (low)
    a.lower -= static_cast<double>(extra) * h;
  else
    a.upper += static_cast<double>(extra) * h;
  a.points += extra;
}

inline GridSpec refine(const GridSpec& g) {
  GridSpec r = g;
  r.location.points = 2 * g.location.points - 1;
  r.scale.points = 2 * g.scale.points - 1;
  return r;
}

}  // namespace detail

/// Default grid: x in [-12, 12], t within 12 nats of log var(w), spacing 0.05.
inline GridSpec default_t_grid(const StudentTModel& model) {
  const Vector& w = model.w();
  std::vector<double> sorted(w.data(), w.data() + w.size());
  std::sort(sorted.begin(), sorted.end());
  GridSpec g;
  g.center = sorted[sorted.size() / 2];
  const double mean = w.mean();
  double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
  if (!(var > 0.0)) var = 1.0;
  const double t0 = std::log(var);
  g.scale = {t0 - 12.0, t0 + 12.0, 481, AxisTransform::Log};
  g.location = {-12.0, 12.0, 481, AxisTransform::Standardized};
  if (const auto* nm = std::get_if<NormalMeanPrior>(&model.prior())) {
    g.prior_center = nm->gamma;
    g.prior_precision = 1.0;
  }
  return g;
}

/// Posterior moments of (mu, sigma2) by 2-D trapezoidal quadrature, widening
/// the grid until every boundary carries less than `leak_tol` of the mass,
/// then checking stability under grid refinement. A moment whose integrand
/// does not decay in the sigma2 tail is flagged and reported as infinite.
inline StudentTPosteriorOracle quadrature_toy_t(const StudentTModel& model, std::optional<GridSpec> grid = std::nullopt,
                                                double leak_tol = 1e-10) {
  if (model.m() > 10) throw PreconditionError("quadrature_toy_t: m must be <= 10");
  GridSpec g = grid ? *grid : default_t_grid(model);
  g.location.validate();
  g.scale.validate();

  constexpr double kMaxT = 400.0;
  constexpr double kMaxX = 1e4;
  detail::TGridSums s;
  for (int iter = 0;; ++iter) {
    s = detail::t_grid_sums(model, g, false);
    bool changed = false;
    if (s.leak_x_lo > leak_tol) detail::widen(g.location, true, 0.5 * (g.location.upper - g.location.lower)), changed = true;
    if (s.leak_x_hi > leak_tol) detail::widen(g.location, false, 0.5 * (g.location.upper - g.location.lower)), changed = true;
    if (s.leak_t_lo > leak_tol) detail::widen(g.scale, true, 6.0), changed = true;
    if (s.leak_t_hi > leak_tol) detail::widen(g.scale, false, 6.0), changed = true;
    if (!changed) break;
    if (g.scale.upper - g.scale.lower > kMaxT || g.location.upper - g.location.lower > kMaxX || iter > 60)
      throw GridTooSmallError("quadrature_toy_t: boundary mass leakage persists after widening");
  }

  StudentTPosteriorOracle out;
  // Moment integrands of |mu|, mu^2, sigma2 and sigma2^2: extend the upper t
  // bound until each decays, or until the extension limit shows it does not.
  std::array<bool, 4> finite{true, true, true, true};
  {
    GridSpec g4 = g;
    detail::TGridSums s4 = s;
    auto leaking = [&] {
      for (std::size_t k = 0; k < 4; ++k)
        if (finite[k] && s4.moment_leak_t_hi[k] > leak_tol) return true;
      return false;
    };
    while (leaking()) {
      if (g4.scale.upper - g.scale.upper > 60.0) {
        for (std::size_t k = 0; k < 4; ++k)
          if (s4.moment_leak_t_hi[k] > leak_tol) finite[k] = false;
        break;
      }
      detail::widen(g4.scale, false, 6.0);
      s4 = detail::t_grid_sums(model, g4, false);
    }
    g = g4;
    s = s4;
  }
  out.mean_mu_finite = finite[0];
  out.var_mu_finite = finite[1];
  out.mean_sigma2_finite = finite[2];
  out.var_sigma2_finite = finite[3];

  const GridSpec fine = detail::refine(g);
  detail::TGridSums sf = detail::t_grid_sums(model, fine, true);
  out.grid = fine;
  out.boundary_leak = std::max({sf.leak_x_lo, sf.leak_x_hi, sf.leak_t_lo, sf.leak_t_hi});
  out.mean_mu = out.mean_mu_finite ? sf.mu / sf.mass : NAN;
  out.var_mu = out.var_mu_finite ? sf.mu2 / sf.mass - out.mean_mu * out.mean_mu : INFINITY;
  out.mean_sigma2 = out.mean_sigma2_finite ? sf.s2 / sf.mass : INFINITY;
  out.var_sigma2 = out.var_sigma2_finite ? sf.s4 / sf.mass - out.mean_sigma2 * out.mean_sigma2 : INFINITY;
  if (out.mean_sigma2_finite)
    out.richardson_rel_change = std::abs(out.mean_sigma2 - s.s2 / s.mass) / out.mean_sigma2;
  else
    out.richardson_rel_change = std::abs(sf.log_s2 / sf.mass - s.log_s2 / s.mass) /
                                std::max(1.0, std::abs(sf.log_s2 / sf.mass));

  const std::size_t nt = fine.scale.points, nx = fine.location.points;
  out.row_cdf.resize(nt);
  out.x_cdf.assign(nt, std::vector<double>(nx));
  double acc = 0.0;
  for (std::size_t i = 0; i < nt; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      row += sf.cell[i][j];
      out.x_cdf[i][j] = row;
    }
    if (row > 0.0)
      for (double& v : out.x_cdf[i]) v /= row;
    acc += row;
    out.row_cdf[i] = acc;
  }
  for (double& v : out.row_cdf) v /= acc;
  return out;
}

// ---------------------------------------------------------------------------
// Toy Laplace

struct ToyLaplaceOracle {
  double mean_u = 0.0;       // from the closed-form marginal
  double mean_u2 = 0.0;
  double mean_u_2d = 0.0;    // from 2-D quadrature of f(u, z)
  double mean_u2_2d = 0.0;
  std::vector<double> grid;  // u values of the symmetry table
  Matrix kernel_times_density;  // (i, j) = k_S(grid[j] | grid[i]) f_U(grid[i])
  double max_asymmetry = 0.0;
};

namespace detail {

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

/// Integral over the half-line z > 0 (positive) or z <= 0 of g(z), where g
/// decays at least like e^{-|z|}.
inline double half_line(const std::function<double(double)>& g, bool positive, double reach) {
  return positive ? integrate(g, 0.0, reach, 1e-13) : integrate(g, -reach, 0.0, 1e-13);
}

}  // namespace detail

/// k_S(u' | u) f_U(u) for the sandwich kernel z | u -> z' (same half-line) -> u' | z',
/// integrated numerically over (z, z') one quadrant at a time.
inline double toy_sandwich_kernel_density(const ToyLaplaceModel& model, double u, double u_to) {
  const double reach = 40.0 + std::abs(u) + std::abs(u_to);
  double total = 0.0;
  for (bool positive : {true, false}) {
    total += detail::half_line(
        [&](double z) {
          const double inner = detail::half_line(
              [&](double z2) { return toy_laplace_move_density(z2, z) * detail::std_normal_pdf(u_to - z2); }, positive,
              reach);
          return std::exp(model.log_joint(u, z)) * inner;
        },
        positive, reach);
  }
  return total;
}

inline ToyLaplaceOracle quadrature_toy_laplace(std::size_t grid_points = 15, double u_max = 3.0) {
  ToyLaplaceModel model;
  ToyLaplaceOracle out;
  auto fu = [&](double u) { return std::exp(model.log_marginal_u(u)); };
  out.mean_u = integrate([&](double u) { return u * fu(u); }, -60.0, 0.0) +
               integrate([&](double u) { return u * fu(u); }, 0.0, 60.0);
  out.mean_u2 = integrate([&](double u) { return u * u * fu(u); }, -60.0, 0.0) +
                integrate([&](double u) { return u * u * fu(u); }, 0.0, 60.0);
  auto moment_2d = [&](int power) {
    auto outer = [&](double z) {
      const double inner = integrate(
          [&](double u) { return std::pow(u, power) * std::exp(model.log_joint(u, z)); }, z - 40.0, z + 40.0, 1e-13);
      return inner;
    };
    return integrate(outer, -60.0, 0.0, 1e-12) + integrate(outer, 0.0, 60.0, 1e-12);
  };
  out.mean_u_2d = moment_2d(1);
  out.mean_u2_2d = moment_2d(2);

  const std::size_t n = grid_points;
  out.grid.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.grid[i] = n == 1 ? 0.0 : -u_max + 2.0 * u_max * static_cast<double>(i) / static_cast<double>(n - 1);
  out.kernel_times_density.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.kernel_times_density(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          toy_sandwich_kernel_density(model, out.grid[i], out.grid[j]);
  out.max_asymmetry = (out.kernel_times_density - out.kernel_times_density.transpose()).cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// Hastings ratio of the hybrid-scan update viewed as a Metropolis-Hastings move

enum class TBlock { Scale, Location };

/// One pair (x, x') for the update of `block` with the other parameter held at `fixed`.
struct HastingsPair {
  TBlock block = TBlock::Scale;
  double from = 0.0;
  double to = 0.0;
  double fixed = 0.0;
};

namespace detail {

/// Candidate density c(to | from; fixed) = int f_{block | other, z}(to) f_{Z | from, fixed}(z) dz,
/// by tensor trapezoid over log z_i.
inline double t_candidate_density(const StudentTModel& model, TBlock block, double from, double to, double fixed,
                                  std::size_t points) {
  const auto m = static_cast<std::size_t>(model.m());
  const StudentTState state = block == TBlock::Scale ? StudentTState{fixed, from} : StudentTState{from, fixed};
  std::vector<std::vector<double>> node(m), logw(m);
  for (std::size_t i = 0; i < m; ++i) {
    const GammaLaw law = model.latent_law(static_cast<Eigen::Index>(i), state);
    const double c = std::log(law.mean());
    const double lo = c - 16.0, hi = c + 3.5;
    const double h = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) {
      const double s = lo + h * static_cast<double>(k);
      const double z = std::exp(s);
      const double edge = (k == 0 || k + 1 == points) ? 0.5 : 1.0;
      node[i].push_back(z);
      logw[i].push_back(law.log_pdf(z) + s + std::log(h * edge));
    }
  }
  const Vector& w = model.w();
  const double md = static_cast<double>(m);
  // sufficient statistics accumulated down the recursion: sum z r^2 (scale
  // block, r relative to mu = fixed) or (z., sum z w) (location block)
  double total = 0.0;
  std::function<void(std::size_t, double, double, double)> rec = [&](std::size_t d, double lw, double a, double b) {
    if (d == m) {
      double lf;
      if (block == TBlock::Scale) {
        lf = InvGammaLaw{0.5 * md, 0.5 * a}.log_pdf(to);
      } else if (model.flat_prior()) {
        lf = NormalLaw{b / a, fixed / a}.log_pdf(to);
      } else {
        const double gamma = std::get<NormalMeanPrior>(model.prior()).gamma;
        const double prec = a / fixed + 1.0;
        lf = NormalLaw{(b / fixed + gamma) / prec, 1.0 / prec}.log_pdf(to);
      }
      total += std::exp(lw + lf);
      return;
    }
    const double wi = w(static_cast<Eigen::Index>(d));
    const double r = wi - fixed;
    for (std::size_t k = 0; k < points; ++k) {
      const double z = node[d][k];
      if (block == TBlock::Scale)
        rec(d + 1, lw + logw[d][k], a + z * r * r, 0.0);
      else
        rec(d + 1, lw + logw[d][k], a + z, b + z * wi);
    }
  };
  rec(0, 0.0, 0.0, 0.0);
  return total;
}

}  // namespace detail

/// r(x, x') = f(x' | y) c(x | x'; y) / (f(x | y) c(x' | x; y)) for one pair.
inline double hastings_ratio(const StudentTModel& model, const HastingsPair& pr, std::size_t points = 0) {
  if (model.m() > 5) throw PreconditionError("hastings_ratio: m must be <= 5");
  if (points == 0) points = model.m() <= 3 ? 128 : 40;
  if (pr.from == pr.to) return 1.0;
  auto log_post = [&](double v) {
    return pr.block == TBlock::Scale ? model.log_posterior(pr.fixed, v) : model.log_posterior(v, pr.fixed);
  };
  const double forward = detail::t_candidate_density(model, pr.block, pr.from, pr.to, pr.fixed, points);
  const double backward = detail::t_candidate_density(model, pr.block, pr.to, pr.from, pr.fixed, points);
  if (!(forward > 0.0) || !(backward > 0.0)) throw NumericalError("hastings_ratio: candidate density underflow");
  return std::exp(log_post(pr.to) - log_post(pr.from)) * backward / forward;
}

/// max |r(x, x') - 1| over the pairs.
inline double hastings_ratio_check(const StudentTModel& model, const std::vector<HastingsPair>& pairs,
                                   std::size_t points = 0) {
  double worst = 0.0;
  for (const HastingsPair& p : pairs) worst = std::max(worst, std::abs(hastings_ratio(model, p, points) - 1.0));
  return worst;
}

// ---------------------------------------------------------------------------
// GLMM Gaussian conditional in partitioned form

struct GlmmBlockForm {
  Vector mean;
  Matrix covariance;
};

/// Mean and covariance of theta | lambda, tau from the partitioned
/// expressions T = lambda0 (X^T X + D_tau^{-1}), M = I - lambda0 X T^{-1} X^T,
/// Q = lambda0 Z^T M Z + D^{-1}, written with explicit inverses and no use of
/// the joint precision matrix.
inline GlmmBlockForm glmm_block_form(const GlmmModel& model, const Vector& lambda, const Vector& tau) {
  const Matrix& x = model.x();
  const Matrix& z = model.z();
  const Vector& y = model.y();
  const Eigen::Index p = model.p(), q = model.q(), n = model.n_obs();
  const double l0 = lambda(0);
  Matrix t = x.transpose() * x;
  for (Eigen::Index j = 0; j < p; ++j) t(j, j) += 1.0 / tau(j);
  t *= l0;
  const Matrix t_inv = t.inverse();
  const Matrix mm = Matrix::Identity(n, n) - l0 * x * t_inv * x.transpose();
  Matrix d_inv = Matrix::Zero(q, q);
  Eigen::Index start = 0;
  for (Eigen::Index i = 0; i < model.m(); ++i) {
    for (Eigen::Index k = 0; k < model.q_block(i); ++k) d_inv(start + k, start + k) = lambda(i + 1);
    start += model.q_block(i);
  }
  const Matrix qm = l0 * z.transpose() * mm * z + d_inv;
  const Matrix q_inv = qm.inverse();
  const Matrix txz = t_inv * x.transpose() * z;

  GlmmBlockForm out;
  out.mean.resize(p + q);
  out.mean.head(p) = l0 * t_inv * x.transpose() * y - l0 * l0 * txz * q_inv * z.transpose() * mm * y;
  out.mean.tail(q) = l0 * q_inv * z.transpose() * mm * y;
  out.covariance.resize(p + q, p + q);
  out.covariance.topLeftCorner(p, p) = t_inv + l0 * l0 * txz * q_inv * txz.transpose();
  out.covariance.topRightCorner(p, q) = -l0 * txz * q_inv;
  out.covariance.bottomLeftCorner(q, p) = -l0 * q_inv * txz.transpose();
  out.covariance.bottomRightCorner(q, q) = q_inv;
  return out;
}

// ---------------------------------------------------------------------------
// One-dimensional oracles

/// E[V^order] for V ~ GIG by adaptive quadrature on the log scale.
inline double gig_moment_numeric(const GigParams& p, int order) {
  if (order < 0) throw PreconditionError("gig_moment_numeric: order must be >= 0");
  p.validate();
  const double center = std::log(p.mean());
  const LogIntegral li = integrate_exp(
      [&](double t) { return p.log_pdf(std::exp(t)) + (order + 1.0) * t; }, std::isfinite(center) ? center : 0.0);
  if (li.rel_error > 1e-6) throw NumericalError("gig_moment_numeric: quadrature did not converge");
  return std::exp(li.log_value);
}

/// CDF of a positive variable tabulated from its log density on the log scale.
struct TabulatedCdf {
  std::vector<double> t;  // log x nodes
  std::vector<double> F;

  double operator()(double x) const {
    if (!(x > 0.0)) return 0.0;
    const double lt = std::log(x);
    if (lt <= t.front()) return 0.0;
    if (lt >= t.back()) return 1.0;
    const auto it = std::upper_bound(t.begin(), t.end(), lt);
    const std::size_t j = static_cast<std::size_t>(it - t.begin());
    const double a = (lt - t[j - 1]) / (t[j] - t[j - 1]);
    return F[j - 1] + a * (F[j] - F[j - 1]);
  }
};

inline TabulatedCdf tabulate_cdf_log_scale(const std::function<double(double)>& log_density, double center_x,
                                           std::size_t points = 20001) {
  auto lf = [&](double t) { return log_density(std::exp(t)) + t; };
  const LogIntegral li = integrate_exp(lf, std::log(center_x));
  TabulatedCdf out;
  out.t.resize(points);
  out.F.resize(points);
  const double h = (li.upper - li.lower) / static_cast<double>(points - 1);
  std::vector<double> dens(points);
  for (std::size_t i = 0; i < points; ++i) {
    out.t[i] = li.lower + h * static_cast<double>(i);
    dens[i] = std::exp(lf(out.t[i]) - li.log_value);
  }
  out.F[0] = 0.0;
  for (std::size_t i = 1; i < points; ++i) out.F[i] = out.F[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
  const double last = out.F.back();
  for (double& v : out.F) v /= last;
  return out;
}

}  // namespace hsg
