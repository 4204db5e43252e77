#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hsg/distributions.hpp"
#include "hsg/errors.hpp"
#include "hsg/linalg.hpp"

namespace hsg {

/// pi(mu, sigma2) prop. to 1/sigma2.
struct FlatPrior {};

/// pi*(mu, sigma2) prop. to exp{-(mu - gamma)^2 / 2} / sigma2.
struct NormalMeanPrior {
  double gamma = 0.0;
};

using StudentTPrior = std::variant<FlatPrior, NormalMeanPrior>;

struct StudentTState {
  double mu = 0.0;
  double sigma2 = 1.0;
};

/// Sufficient statistics of the latent precisions used by the group moves:
/// z_dot = sum z_i, theta = weighted mean of w, v = weighted within-scatter.
struct TLatentStats {
  Vector z;
  double z_dot = 0.0;
  double theta_zw = 0.0;
  double v_zw = 0.0;

  static TLatentStats from(const Vector& z, const Vector& w) {
    if (z.size() != w.size()) throw PreconditionError("latent/data length mismatch");
    if ((z.array() <= 0.0).any()) throw DomainError("latent precisions must be strictly positive");
    TLatentStats s;
    s.z = z;
    s.z_dot = pairwise_sum(z);
    const Vector zw = z.cwiseProduct(w);
    s.theta_zw = pairwise_sum(zw) / s.z_dot;
    const Vector dev = (w.array() - s.theta_zw).matrix();
    s.v_zw = std::max(0.0, weighted_sum_of_squares(dev, z) / s.z_dot);
    return s;
  }
};

/// Full conditionals of the Student's t location-scale model. Optional members
/// are populated only when the law exists for the prior in use.
struct TConditionals {
  std::vector<GammaLaw> latent;                   // z_i | mu, sigma2
  std::optional<InvGammaLaw> sigma2;              // sigma2 | mu, z
  std::optional<NormalLaw> mu;                    // mu | sigma2, z
  std::optional<InvGammaLaw> sigma2_marginal;     // sigma2 | z (flat prior only)
};

/// W_1..W_m iid location-scale Student's t with known dof, latent
/// representation W_i | z_i ~ N(mu, sigma2/z_i), z_i ~ Gamma(nu/2, nu/2).
class StudentTModel {
 public:
  StudentTModel(Vector w, double nu, StudentTPrior prior = FlatPrior{})
      : w_(std::move(w)), nu_(nu), prior_(prior) {
    if (w_.size() < 2) throw PreconditionError("Student's t model needs m >= 2 observations");
    if (!w_.allFinite()) throw PreconditionError("Student's t data must be finite");
    detail::require_positive(nu_, "degrees of freedom nu");
  }

  const Vector& w() const { return w_; }
  double nu() const { return nu_; }
  Eigen::Index m() const { return w_.size(); }
  const StudentTPrior& prior() const { return prior_; }
  bool flat_prior() const { return std::holds_alternative<FlatPrior>(prior_); }

  void validate_state(const StudentTState& s) const {
    if (!std::isfinite(s.mu)) throw DomainError("mu must be finite");
    detail::require_positive(s.sigma2, "sigma2");
  }

  GammaLaw latent_law(Eigen::Index i, const StudentTState& s) const {
    const double r = w_(i) - s.mu;
    return {0.5 * (nu_ + 1.0), 0.5 * (r * r / s.sigma2 + nu_)};
  }

  /// sigma2 | mu, z ~ IG(m/2, sum z_i (w_i - mu)^2 / 2) under either prior.
  InvGammaLaw sigma2_law(double mu, const Vector& z) const {
    const Vector dev = (w_.array() - mu).matrix();
    return {0.5 * static_cast<double>(m()), 0.5 * weighted_sum_of_squares(dev, z)};
  }

  NormalLaw mu_law(double sigma2, const Vector& z) const {
    const double z_dot = pairwise_sum(z);
    const Vector zw = z.cwiseProduct(w_);
    const double s_zw = pairwise_sum(zw);
    if (flat_prior()) return {s_zw / z_dot, sigma2 / z_dot};
    const double gamma = std::get<NormalMeanPrior>(prior_).gamma;
    const double precision = z_dot / sigma2 + 1.0;
    return {(s_zw / sigma2 + gamma) / precision, 1.0 / precision};
  }

  /// sigma2 | z with mu integrated out; flat prior only.
  InvGammaLaw sigma2_marginal_law(const Vector& z) const {
    if (!flat_prior()) throw UnsupportedError("sigma2 | z is nonstandard under the normal-mean prior");
    const TLatentStats st = TLatentStats::from(z, w_);
    return {0.5 * static_cast<double>(m() - 1), 0.5 * st.z_dot * st.v_zw};
  }

  TConditionals conditionals(const StudentTState& s, const std::optional<Vector>& z) const {
    validate_state(s);
    TConditionals c;
    c.latent.reserve(static_cast<std::size_t>(m()));
    for (Eigen::Index i = 0; i < m(); ++i) c.latent.push_back(latent_law(i, s));
    if (z) {
      if (z->size() != m()) throw PreconditionError("latent length must equal m");
      if ((z->array() <= 0.0).any()) throw DomainError("latent precisions must be strictly positive");
      c.sigma2 = sigma2_law(s.mu, *z);
      c.mu = mu_law(s.sigma2, *z);
      if (flat_prior()) c.sigma2_marginal = sigma2_marginal_law(*z);
    }
    return c;
  }

  double log_prior(double mu, double sigma2) const {
    double lp = -std::log(sigma2);
    if (!flat_prior()) {
      const double d = mu - std::get<NormalMeanPrior>(prior_).gamma;
      lp -= 0.5 * d * d;
    }
    return lp;
  }

  /// log f(mu, sigma2, z) up to an additive constant.
  double log_joint(double mu, double sigma2, const Vector& z) const {
    double s = log_prior(mu, sigma2);
    for (Eigen::Index i = 0; i < m(); ++i) {
      const double r = w_(i) - mu;
      s += 0.5 * std::log(z(i)) - 0.5 * std::log(sigma2) - z(i) * r * r / (2.0 * sigma2) +
           (0.5 * nu_ - 1.0) * std::log(z(i)) - 0.5 * nu_ * z(i);
    }
    return s;
  }

  /// log posterior of (mu, sigma2) up to an additive constant (latents integrated out).
  double log_posterior(double mu, double sigma2) const {
    double s = log_prior(mu, sigma2) - 0.5 * static_cast<double>(m()) * std::log(sigma2);
    for (Eigen::Index i = 0; i < m(); ++i) {
      const double r = w_(i) - mu;
      s -= 0.5 * (nu_ + 1.0) * std::log1p(r * r / (nu_ * sigma2));
    }
    return s;
  }

  /// Flat prior: (mean(w), var(w)); normal-mean prior: mu drawn from its prior.
  StudentTState initial_state(RngStream& rng) const {
    const double mean = w_.mean();
    double var = (w_.array() - mean).square().sum() / static_cast<double>(m() - 1);
    if (!(var > 0.0)) var = 1.0;
    if (flat_prior()) return {mean, var};
    return {std::get<NormalMeanPrior>(prior_).gamma + rng.normal(), var};
  }

  std::vector<std::string> param_names() const { return {"mu", "sigma2"}; }

 private:
  Vector w_;
  double nu_;
  StudentTPrior prior_;
};

}  // namespace hsg
