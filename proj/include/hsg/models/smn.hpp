#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hsg/distributions.hpp"
#include "hsg/errors.hpp"
#include "hsg/linalg.hpp"

namespace hsg {

/// h = Gamma(nu/2, nu/2): Student's t errors.
struct StudentTMixing {
  double nu;
};

/// h = IG(alpha, 1): generalized hyperbolic errors.
struct InvGammaMixing {
  double alpha;
};

/// User-supplied mixing density; the latent conditional is drawn by rejection
/// with h itself as the candidate.
struct CustomMixing {
  std::function<double(double)> log_density;
  std::function<double(RngStream&)> sampler;
  std::string name = "custom";
};

using MixingDensity = std::variant<StudentTMixing, InvGammaMixing, CustomMixing>;

inline double mixing_log_density(const MixingDensity& h, double z) {
  if (const auto* t = std::get_if<StudentTMixing>(&h)) return GammaLaw{0.5 * t->nu, 0.5 * t->nu}.log_pdf(z);
  if (const auto* g = std::get_if<InvGammaMixing>(&h)) return InvGammaLaw{g->alpha, 1.0}.log_pdf(z);
  return std::get<CustomMixing>(h).log_density(z);
}

/// Latent law z | beta, sigma2, y_i for a custom mixing density:
/// prop. to z^{1/2} exp(-z r^2 / (2 sigma2)) h(z).
struct CustomLatentLaw {
  double residual_sq;
  double sigma2;
  const CustomMixing* mixing;

  double sample(RngStream& rng, std::uint64_t cap = kDefaultRejectionCap) const {
    const double a = residual_sq / (2.0 * sigma2);
    if (!(a > 0.0))
      throw NumericalError("custom mixing rejection sampler needs a nonzero residual (envelope unbounded)");
    // max_z z^{1/2} e^{-a z} is attained at z = 1/(2a)
    const double log_bound = 0.5 * std::log(0.5 / a) - 0.5;
    for (std::uint64_t trial = 0; trial < cap; ++trial) {
      const double z = mixing->sampler(rng);
      if (!(z > 0.0)) continue;
      if (std::log(rng.uniform()) <= 0.5 * std::log(z) - a * z - log_bound) return z;
    }
    throw RejectionCapError("custom mixing rejection sampler exceeded trial cap");
  }
};

using SmnLatentLaw = std::variant<GammaLaw, GigParams, CustomLatentLaw>;

inline double sample_latent(const SmnLatentLaw& law, RngStream& rng) {
  return std::visit([&](const auto& l) { return l.sample(rng); }, law);
}

struct SmnState {
  Vector beta;
  double sigma2 = 1.0;
};

struct SmnConditionals {
  std::vector<SmnLatentLaw> latent;       // z_i | beta, sigma2, y_i
  std::optional<InvGammaLaw> sigma2;      // sigma2 | beta, z, y
  std::optional<MvnPrecisionLaw> beta;    // beta | sigma2, z, y
};

/// Linear regression with scale-mixture-of-normals errors and independent
/// priors beta ~ N_p(mu, Sigma), sigma2 ~ IG(alpha, gamma).
class SmnModel {
 public:
  SmnModel(Vector y, Matrix x, Vector prior_mean, Matrix prior_cov, double alpha, double gamma, MixingDensity mixing)
      : y_(std::move(y)),
        x_(std::move(x)),
        prior_mean_(std::move(prior_mean)),
        prior_cov_(std::move(prior_cov)),
        alpha_(alpha),
        gamma_(gamma),
        mixing_(std::move(mixing)) {
    if (x_.rows() != y_.size()) throw PreconditionError("X must have m rows");
    if (y_.size() < std::max<Eigen::Index>(2, x_.cols())) throw PreconditionError("SMN model needs m >= max(2, p)");
    if (prior_mean_.size() != x_.cols() || prior_cov_.rows() != x_.cols() || prior_cov_.cols() != x_.cols())
      throw PreconditionError("prior mean/covariance must have dimension p");
    if (!is_symmetric(prior_cov_)) throw PreconditionError("prior covariance must be symmetric");
    Eigen::LLT<Matrix> llt(prior_cov_);
    if (llt.info() != Eigen::Success) throw PreconditionError("prior covariance must be positive definite");
    prior_precision_ = llt.solve(Matrix::Identity(p(), p()));
    detail::require_positive(alpha_, "sigma2 prior alpha");
    detail::require_positive(gamma_, "sigma2 prior gamma");
    if (const auto* t = std::get_if<StudentTMixing>(&mixing_)) detail::require_positive(t->nu, "mixing nu");
    if (const auto* g = std::get_if<InvGammaMixing>(&mixing_)) detail::require_positive(g->alpha, "mixing alpha");
    if (const auto* c = std::get_if<CustomMixing>(&mixing_); c && (!c->log_density || !c->sampler))
      throw PreconditionError("custom mixing needs both a log density and a sampler");
  }

  Eigen::Index m() const { return y_.size(); }
  Eigen::Index p() const { return x_.cols(); }
  const Vector& y() const { return y_; }
  const Matrix& x() const { return x_; }
  const Vector& prior_mean() const { return prior_mean_; }
  const Matrix& prior_cov() const { return prior_cov_; }
  const Matrix& prior_precision() const { return prior_precision_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  const MixingDensity& mixing() const { return mixing_; }

  void validate_state(const SmnState& s) const {
    if (s.beta.size() != p()) throw PreconditionError("beta must have length p");
    if (!s.beta.allFinite()) throw DomainError("beta must be finite");
    detail::require_positive(s.sigma2, "sigma2");
  }

  Vector residuals(const Vector& beta) const { return y_ - x_ * beta; }

  SmnLatentLaw latent_law(double residual, double sigma2) const {
    const double r2 = residual * residual;
    if (const auto* t = std::get_if<StudentTMixing>(&mixing_))
      return GammaLaw{0.5 * (t->nu + 1.0), (r2 + t->nu * sigma2) / (2.0 * sigma2)};
    if (const auto* g = std::get_if<InvGammaMixing>(&mixing_)) {
      // An exactly-zero residual makes the GIG degenerate (xi = 0); floor it.
      return GigParams{0.5 - g->alpha, std::max(r2 / sigma2, kXiFloor), 2.0};
    }
    return CustomLatentLaw{r2, sigma2, &std::get<CustomMixing>(mixing_)};
  }

  /// sigma2 | beta, z ~ IG(m/2 + alpha, ((y - X beta)^T Q^{-1} (y - X beta) + 2 gamma) / 2).
  InvGammaLaw sigma2_law(const Vector& beta, const Vector& z) const {
    const double ss = weighted_sum_of_squares(residuals(beta), z);
    return {0.5 * static_cast<double>(m()) + alpha_, 0.5 * (ss + 2.0 * gamma_)};
  }

  /// beta | sigma2, z ~ N_p(mu', sigma2 Sigma'), held in precision form
  /// X^T Q^{-1} X / sigma2 + Sigma^{-1}.
  MvnPrecisionLaw beta_law(double sigma2, const Vector& z) const {
    const Matrix xtz = x_.transpose() * z.asDiagonal();
    const Matrix prec = (xtz * x_) / sigma2 + prior_precision_;
    const Vector lin = (xtz * y_) / sigma2 + prior_precision_ * prior_mean_;
    return MvnPrecisionLaw(prec, lin);
  }

  /// mu' = (X^T Q^{-1} X + sigma2 Sigma^{-1})^{-1} (X^T Q^{-1} y + sigma2 Sigma^{-1} mu).
  Vector mu_prime(double sigma2, const Vector& z) const {
    const Matrix xtz = x_.transpose() * z.asDiagonal();
    const Matrix a = xtz * x_ + sigma2 * prior_precision_;
    return a.ldlt().solve(xtz * y_ + sigma2 * prior_precision_ * prior_mean_);
  }

  /// Sigma' = (X^T Q^{-1} X + sigma2 Sigma^{-1})^{-1}.
  Matrix sigma_prime(double sigma2, const Vector& z) const {
    const Matrix xtz = x_.transpose() * z.asDiagonal();
    const Matrix a = xtz * x_ + sigma2 * prior_precision_;
    return a.ldlt().solve(Matrix::Identity(p(), p()));
  }

  SmnConditionals conditionals(const SmnState& s, const std::optional<Vector>& z) const {
    validate_state(s);
    SmnConditionals c;
    const Vector r = residuals(s.beta);
    for (Eigen::Index i = 0; i < m(); ++i) c.latent.push_back(latent_law(r(i), s.sigma2));
    if (z) {
      if (z->size() != m()) throw PreconditionError("latent length must equal m");
      if (!(z->array() > 0.0).all()) throw DomainError("latent precisions must be strictly positive");
      c.sigma2 = sigma2_law(s.beta, *z);
      c.beta.emplace(beta_law(s.sigma2, *z));
    }
    return c;
  }

  /// Log complete-data posterior of (beta, sigma2, z) up to a constant.
  double log_joint(const Vector& beta, double sigma2, const Vector& z) const {
    const Vector r = residuals(beta);
    double s = 0.0;
    for (Eigen::Index i = 0; i < m(); ++i)
      s += 0.5 * std::log(z(i)) - 0.5 * std::log(sigma2) - z(i) * r(i) * r(i) / (2.0 * sigma2) +
           mixing_log_density(mixing_, z(i));
    const Vector d = beta - prior_mean_;
    s += -(alpha_ + 1.0) * std::log(sigma2) - gamma_ / sigma2 - 0.5 * d.dot(prior_precision_ * d);
    return s;
  }

  /// Prior draw: beta ~ N(mu, Sigma), sigma2 ~ IG(alpha, gamma).
  SmnState initial_state(RngStream& rng) const {
    SmnState s;
    s.beta = MvnLaw(prior_mean_, prior_cov_).sample(rng);
    s.sigma2 = InvGammaLaw{alpha_, gamma_}.sample(rng);
    return s;
  }

  std::vector<std::string> param_names() const {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p(); ++j) names.push_back("beta" + std::to_string(j + 1));
    names.push_back("sigma2");
    return names;
  }

  static constexpr double kXiFloor = 1e-300;

 private:
  Vector y_;
  Matrix x_;
  Vector prior_mean_;
  Matrix prior_cov_;
  Matrix prior_precision_;
  double alpha_;
  double gamma_;
  MixingDensity mixing_;
};

/// E[z_i | beta, sigma2, y] in closed form for the Student's t and inverse-gamma
/// mixing families.
inline Vector expected_latent(const SmnModel& model, const Vector& beta, double sigma2) {
  detail::require_positive(sigma2, "sigma2");
  if (std::holds_alternative<CustomMixing>(model.mixing()))
    throw UnsupportedError("expected_latent: no closed form for a custom mixing density");
  const Vector r = model.residuals(beta);
  Vector e(model.m());
  for (Eigen::Index i = 0; i < model.m(); ++i) {
    const double r2 = r(i) * r(i);
    if (const auto* t = std::get_if<StudentTMixing>(&model.mixing())) {
      e(i) = sigma2 * (t->nu + 1.0) / (r2 + t->nu * sigma2);
    } else {
      const double alpha = std::get<InvGammaMixing>(model.mixing()).alpha;
      if (r2 == 0.0) {
        // xi -> 0 limit: z ~ IG(alpha - 1/2, 1)
        e(i) = alpha > 1.5 ? 1.0 / (alpha - 1.5) : INFINITY;
      } else {
        const double arg = std::sqrt(2.0 * r2 / sigma2);
        e(i) = std::sqrt(2.0 * sigma2 / r2) * bessel_k_ratio(1.5 - alpha, 0.5 - alpha, arg);
      }
    }
  }
  return e;
}

}  // namespace hsg
