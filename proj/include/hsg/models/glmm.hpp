#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hsg/distributions.hpp"
#include "hsg/errors.hpp"
#include "hsg/linalg.hpp"

namespace hsg {

/// Hyperparameters of the normal-gamma shrinkage mixed model: lambda_i ~
/// Gamma(a_i, b_i) for i = 0..m and tau_j ~ Gamma(c, d).
struct GlmmHyper {
  std::vector<double> a;
  std::vector<double> b;
  double c = 0.25;
  double d = 1.0;
};

/// theta = (beta, u) has length p + q; lambda has length m + 1.
struct GlmmState {
  Vector theta;
  Vector lambda;
};

/// Fixed-effect design, random-effect blocks and hyperparameters; everything
/// but the response.
struct GlmmDesign {
  Matrix x;
  std::vector<Matrix> z_blocks;
  GlmmHyper hyper;
};

/// Lower bound applied to the GIG psi-parameter lambda0 * beta_j^2 when
/// beta_j == 0 (a probability-zero event reachable from user initial states).
inline constexpr double kGigPsiFloor = 1e-300;

struct GlmmConditionals {
  std::vector<GigParams> tau;          // tau_j | theta, lambda
  int psi_clamps = 0;                  // how many tau laws hit kGigPsiFloor
  std::vector<GammaLaw> lambda;        // lambda_i | theta, tau (given `tau`)
  std::optional<MvnPrecisionLaw> theta;  // theta | lambda, tau
};

namespace detail {

inline void validate_glmm_hyper(const GlmmHyper& h, std::size_t m) {
  if (h.a.size() != m + 1 || h.b.size() != m + 1)
    throw PreconditionError("GLMM hyperparameters need a_0..a_m and b_0..b_m");
  for (double v : h.a) require_positive(v, "GLMM a_i");
  for (double v : h.b) require_positive(v, "GLMM b_i");
  require_positive(h.c, "GLMM c");
  require_positive(h.d, "GLMM d");
}

}  // namespace detail

/// Bayesian linear mixed model y = X beta + Z u + e with a normal-gamma
/// shrinkage prior on beta. The local scales tau are the latent data; the
/// sampled blocks are lambda (precisions) and theta (location).
class GlmmModel {
 public:
  GlmmModel(Vector y, Matrix x, std::vector<Matrix> z_blocks, GlmmHyper hyper)
      : y_(std::move(y)), x_(std::move(x)), z_blocks_(std::move(z_blocks)), hyper_(std::move(hyper)) {
    if (z_blocks_.empty()) throw PreconditionError("GLMM needs at least one random-effect block");
    if (x_.rows() != y_.size()) throw PreconditionError("X must have N rows");
    detail::validate_glmm_hyper(hyper_, z_blocks_.size());
    q_ = 0;
    for (const Matrix& zb : z_blocks_) {
      if (zb.rows() != y_.size()) throw PreconditionError("every Z block must have N rows");
      if (zb.cols() < 1) throw PreconditionError("Z blocks must have at least one column");
      block_start_.push_back(q_);
      q_ += zb.cols();
    }
    z_.resize(y_.size(), q_);
    for (std::size_t i = 0; i < z_blocks_.size(); ++i)
      z_.middleCols(block_start_[i], z_blocks_[i].cols()) = z_blocks_[i];
    w_.resize(y_.size(), p() + q_);
    w_ << x_, z_;
    wtw_ = w_.transpose() * w_;
    wty_ = w_.transpose() * y_;
  }

  Eigen::Index n_obs() const { return y_.size(); }
  Eigen::Index p() const { return x_.cols(); }
  Eigen::Index q() const { return q_; }
  /// Number of random factors.
  Eigen::Index m() const { return static_cast<Eigen::Index>(z_blocks_.size()); }
  Eigen::Index q_block(Eigen::Index i) const { return z_blocks_[static_cast<std::size_t>(i)].cols(); }

  const Vector& y() const { return y_; }
  const Matrix& x() const { return x_; }
  const Matrix& z() const { return z_; }
  const Matrix& w() const { return w_; }
  const std::vector<Matrix>& z_blocks() const { return z_blocks_; }
  const GlmmHyper& hyper() const { return hyper_; }

  auto beta(const Vector& theta) const { return theta.head(p()); }
  auto u_block(const Vector& theta, Eigen::Index i) const {
    return theta.segment(p() + block_start_[static_cast<std::size_t>(i)], q_block(i));
  }

  void validate_state(const GlmmState& s) const {
    if (s.theta.size() != p() + q_) throw PreconditionError("theta must have length p + q");
    if (s.lambda.size() != m() + 1) throw PreconditionError("lambda must have length m + 1");
    if (!s.theta.allFinite()) throw DomainError("theta must be finite");
    if (!(s.lambda.array() > 0.0).all() || !s.lambda.allFinite())
      throw DomainError("lambda must be strictly positive");
  }

  /// ||y - W theta||^2
  double residual_ss(const Vector& theta) const { return sum_of_squares(y_ - w_ * theta); }

  /// beta^T D_tau^{-1} beta
  double beta_quadratic(const Vector& theta, const Vector& tau) const {
    const Vector b2 = beta(theta).cwiseAbs2().cwiseQuotient(tau);
    return pairwise_sum(b2);
  }

  /// tau_j ~ GIG(c - 1/2, 2d, lambda0 beta_j^2); `clamped` set when the psi floor applied.
  GigParams tau_law(Eigen::Index j, const GlmmState& s, bool* clamped = nullptr) const {
    const double bj = s.theta(j);
    double psi = s.lambda(0) * bj * bj;
    const bool clamp = !(psi >= kGigPsiFloor);
    if (clamp) psi = kGigPsiFloor;
    if (clamped) *clamped = clamp;
    return {hyper_.c - 0.5, 2.0 * hyper_.d, psi};
  }

  std::vector<GammaLaw> lambda_laws(const Vector& theta, const Vector& tau) const {
    std::vector<GammaLaw> laws;
    laws.reserve(static_cast<std::size_t>(m() + 1));
    const double nd = static_cast<double>(n_obs());
    const double pd = static_cast<double>(p());
    laws.push_back({0.5 * (nd + pd + 2.0 * hyper_.a[0]),
                    0.5 * residual_ss(theta) + 0.5 * beta_quadratic(theta, tau) + hyper_.b[0]});
    for (Eigen::Index i = 0; i < m(); ++i) {
      const auto k = static_cast<std::size_t>(i + 1);
      const Vector ui = u_block(theta, i);
      laws.push_back({0.5 * (static_cast<double>(q_block(i)) + 2.0 * hyper_.a[k]),
                      0.5 * sum_of_squares(ui) + hyper_.b[k]});
    }
    return laws;
  }

  /// Precision of theta | lambda, tau:
  ///   lambda0 W^T W + blockdiag(lambda0 D_tau^{-1}, D^{-1}).
  Matrix theta_precision(const Vector& lambda, const Vector& tau) const {
    Matrix prec = lambda(0) * wtw_;
    for (Eigen::Index j = 0; j < p(); ++j) prec(j, j) += lambda(0) / tau(j);
    for (Eigen::Index i = 0; i < m(); ++i) {
      const Eigen::Index start = p() + block_start_[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < q_block(i); ++k) prec(start + k, start + k) += lambda(i + 1);
    }
    return prec;
  }

  MvnPrecisionLaw theta_law(const Vector& lambda, const Vector& tau) const {
    return MvnPrecisionLaw(theta_precision(lambda, tau), lambda(0) * wty_);
  }

  GlmmConditionals conditionals(const GlmmState& s, const std::optional<Vector>& tau) const {
    validate_state(s);
    GlmmConditionals c;
    for (Eigen::Index j = 0; j < p(); ++j) {
      bool clamped = false;
      c.tau.push_back(tau_law(j, s, &clamped));
      c.psi_clamps += clamped ? 1 : 0;
    }
    if (tau) {
      if (tau->size() != p()) throw PreconditionError("tau must have length p");
      if (!(tau->array() > 0.0).all()) throw DomainError("tau must be strictly positive");
      c.lambda = lambda_laws(s.theta, *tau);
      c.theta.emplace(theta_law(s.lambda, *tau));
    }
    return c;
  }

  /// Log of the full posterior density of (theta, tau, lambda) up to a constant.
  double log_joint(const Vector& theta, const Vector& tau, const Vector& lambda) const {
    const double nd = static_cast<double>(n_obs());
    const double pd = static_cast<double>(p());
    double s = 0.5 * (nd + pd) * std::log(lambda(0)) - 0.5 * lambda(0) * residual_ss(theta) -
               0.5 * lambda(0) * beta_quadratic(theta, tau);
    s -= 0.5 * tau.array().log().sum();
    for (Eigen::Index i = 0; i < m(); ++i) {
      const Vector ui = u_block(theta, i);
      s += 0.5 * static_cast<double>(q_block(i)) * std::log(lambda(i + 1)) - 0.5 * lambda(i + 1) * sum_of_squares(ui);
    }
    s += ((hyper_.c - 1.0) * tau.array().log() - hyper_.d * tau.array()).sum();
    for (Eigen::Index i = 0; i <= m(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      s += (hyper_.a[k] - 1.0) * std::log(lambda(i)) - hyper_.b[k] * lambda(i);
    }
    return s;
  }

  /// (y - W theta)^T (y - W theta) + lambda0 + lambda1.
  double test_function(const Vector& theta, const Vector& lambda) const {
    return residual_ss(theta) + lambda(0) + (lambda.size() > 1 ? lambda(1) : 0.0);
  }

  /// Draw (theta, lambda) from the prior.
  GlmmState initial_state(RngStream& rng) const {
    GlmmState s;
    s.lambda.resize(m() + 1);
    for (Eigen::Index i = 0; i <= m(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      s.lambda(i) = GammaLaw{hyper_.a[k], hyper_.b[k]}.sample(rng);
    }
    s.theta.resize(p() + q_);
    for (Eigen::Index j = 0; j < p(); ++j) {
      const double tau = GammaLaw{hyper_.c, hyper_.d}.sample(rng);
      s.theta(j) = std::sqrt(tau / s.lambda(0)) * rng.normal();
    }
    for (Eigen::Index i = 0; i < m(); ++i) {
      const Eigen::Index start = p() + block_start_[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < q_block(i); ++k) s.theta(start + k) = rng.normal() / std::sqrt(s.lambda(i + 1));
    }
    return s;
  }

  std::vector<std::string> param_names() const {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p(); ++j) names.push_back("beta" + std::to_string(j + 1));
    for (Eigen::Index k = 0; k < q_; ++k) names.push_back("u" + std::to_string(k + 1));
    for (Eigen::Index i = 0; i <= m(); ++i) names.push_back("lambda" + std::to_string(i));
    return names;
  }

 private:
  Vector y_;
  Matrix x_;
  std::vector<Matrix> z_blocks_;
  GlmmHyper hyper_;
  Eigen::Index q_ = 0;
  std::vector<Eigen::Index> block_start_;
  Matrix z_;
  Matrix w_;
  Matrix wtw_;
  Vector wty_;
};

// ---------------------------------------------------------------------------
// Synthetic data

/// N x q 0/1 cell-means indicator matrix: rows split into q contiguous groups
/// whose sizes differ by at most one.
inline Matrix cell_means_design(Eigen::Index n, Eigen::Index q) {
  if (n < 1 || q < 1) throw PreconditionError("cell-means design needs n, q >= 1");
  Matrix z = Matrix::Zero(n, q);
  for (Eigen::Index i = 0; i < n; ++i) z(i, (i * q) / n) = 1.0;
  return z;
}

/// Ground truth behind a bottom-up simulated data set.
struct GlmmTruth {
  Vector tau;
  Vector lambda;
  Vector beta;
  Vector u;
};

struct GlmmSimulation {
  Vector y;
  GlmmTruth truth;
};

/// Bottom-up simulation: tau and lambda from their priors, then beta | tau,
/// lambda, then u | lambda, then y.
inline GlmmSimulation simulate_glmm_bottom_up(const GlmmDesign& design, RngStream& rng) {
  const std::size_t m = design.z_blocks.size();
  if (m == 0) throw PreconditionError("GLMM design needs at least one random-effect block");
  detail::validate_glmm_hyper(design.hyper, m);
  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();
  const GlmmHyper& h = design.hyper;

  GlmmSimulation sim;
  GlmmTruth& t = sim.truth;
  t.tau.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) t.tau(j) = GammaLaw{h.c, h.d}.sample(rng);
  t.lambda.resize(static_cast<Eigen::Index>(m + 1));
  for (std::size_t i = 0; i <= m; ++i) t.lambda(static_cast<Eigen::Index>(i)) = GammaLaw{h.a[i], h.b[i]}.sample(rng);
  t.beta.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) t.beta(j) = std::sqrt(t.tau(j) / t.lambda(0)) * rng.normal();
  Eigen::Index q = 0;
  for (const Matrix& zb : design.z_blocks) {
    if (zb.rows() != n) throw PreconditionError("every Z block must have N rows");
    q += zb.cols();
  }
  t.u.resize(q);
  sim.y = design.x * t.beta;
  Eigen::Index start = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const Matrix& zb = design.z_blocks[i];
    for (Eigen::Index k = 0; k < zb.cols(); ++k)
      t.u(start + k) = rng.normal() / std::sqrt(t.lambda(static_cast<Eigen::Index>(i + 1)));
    sim.y += zb * t.u.segment(start, zb.cols());
    start += zb.cols();
  }
  const double sd = 1.0 / std::sqrt(t.lambda(0));
  for (Eigen::Index i = 0; i < n; ++i) sim.y(i) += sd * rng.normal();
  return sim;
}

/// Hyperparameter rows of the three reference simulation settings
/// (N = 100, m = 1, q = 5, b_0 = a_0, a_1 = 1.5, b_1 = 1, c = 1/4, d = 1).
struct Table1Setting {
  int id;
  Eigen::Index n;
  Eigen::Index p;
  Eigen::Index q;
  double a0;
};

inline Table1Setting table1_setting(int id) {
  switch (id) {
    case 1: return {1, 100, 10, 5, 1.0};
    case 2: return {2, 100, 100, 5, 77.0};
    case 3: return {3, 100, 200, 5, 152.0};
    default: throw ConfigError("unknown simulation setting " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
}

/// Design for a reference setting: X iid N(0, 1), one cell-means factor.
inline GlmmDesign table1_design(int id, RngStream& rng) {
  const Table1Setting s = table1_setting(id);
  GlmmDesign d;
  d.x.resize(s.n, s.p);
  for (Eigen::Index j = 0; j < s.p; ++j)
    for (Eigen::Index i = 0; i < s.n; ++i) d.x(i, j) = rng.normal();
  d.z_blocks.push_back(cell_means_design(s.n, s.q));
  d.hyper.a = {s.a0, 1.5};
  d.hyper.b = {s.a0, 1.0};
  d.hyper.c = 0.25;
  d.hyper.d = 1.0;
  return d;
}

}  // namespace hsg
