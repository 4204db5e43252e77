#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "hsg/errors.hpp"
#include "hsg/linalg.hpp"
#include "hsg/rng.hpp"
#include "hsg/special.hpp"

namespace hsg {

/// Trial cap shared by every rejection sampler in the library.
inline constexpr std::uint64_t kDefaultRejectionCap = 1'000'000;

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(what) + " must be positive and finite, got " + std::to_string(v));
}

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Marsaglia & Tsang (2000); shape < 1 handled by the U^{1/a} boost.
inline double standard_gamma(double shape, RngStream& rng) {
  if (shape < 1.0) {
    const double g = standard_gamma(shape + 1.0, rng);
    return g * std::exp(std::log(rng.uniform()) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// ---- GIG on the standardized scale: density prop. to y^{lambda-1} exp(-omega/2 (y + 1/y)),
// lambda >= 0, omega > 0.  Hoermann & Leydold (2014), three regimes.

inline double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms with the mode shifted to the origin.
inline double gig_rou_shift(double lambda, double omega, RngStream& rng, std::uint64_t cap) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  auto log_sqrt_f = [&](double x) { return t * std::log(x) - s * (x + 1.0 / x) - nc; };

  // Extremes of (x - xm) sqrt(f(x)) solve y^3 + a y^2 + b y + c = 0; one root is
  // negative, one lies in (0, xm), one in (xm, inf).
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double r = 2.0 * std::sqrt(-p / 3.0);
  const double arg = std::clamp(3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  double roots[3];
  for (int k = 0; k < 3; ++k) roots[k] = r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - a / 3.0;
  std::sort(roots, roots + 3);
  const double y1 = roots[1];
  const double y2 = roots[2];
  const double uminus = (y1 - xm) * std::exp(log_sqrt_f(y1));
  const double uplus = (y2 - xm) * std::exp(log_sqrt_f(y2));

  for (std::uint64_t trial = 0; trial < cap; ++trial) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x <= 0.0) continue;
    if (std::log(v) <= log_sqrt_f(x)) return x;
  }
  throw RejectionCapError("sample_gig: ratio-of-uniforms (shift) exceeded trial cap");
}

// Ratio-of-uniforms without shift.
inline double gig_rou_noshift(double lambda, double omega, RngStream& rng, std::uint64_t cap) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (std::uint64_t trial = 0; trial < cap; ++trial) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
  throw RejectionCapError("sample_gig: ratio-of-uniforms (no shift) exceeded trial cap");
}

// Rejection from a three-piece envelope (constant / power / exponential) for
// the non-log-concave case 0 <= lambda < 1, small omega.
inline double gig_concave_free(double lambda, double omega, RngStream& rng, std::uint64_t cap) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  const double a0 = k0 * x0;
  double k1, a1, k2, a2;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    a1 = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    a2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    a1 = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                       : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    a2 = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = a0 + a1 + a2;
  const double tail_start = std::max(x0, 2.0 / omega);
  for (std::uint64_t trial = 0; trial < cap; ++trial) {
    double v = total * rng.uniform();
    double x, hx;
    if (v <= a0) {
      x = x0 * v / a0;
      hx = k0;
    } else if ((v -= a0) <= a1) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= a1;
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * tail_start) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    if (!(x > 0.0) || !std::isfinite(x)) continue;
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
  throw RejectionCapError("sample_gig: envelope rejection exceeded trial cap");
}

inline double standard_gig(double lambda, double omega, RngStream& rng, std::uint64_t cap) {
  if (lambda > 2.0 || omega > 3.0) return gig_rou_shift(lambda, omega, rng, cap);
  if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return gig_rou_noshift(lambda, omega, rng, cap);
  return gig_concave_free(lambda, omega, rng, cap);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scalar laws

/// Gamma(shape, rate); mean shape/rate.
struct GammaLaw {
  double shape;
  double rate;

  void validate() const {
    detail::require_positive(shape, "gamma shape");
    detail::require_positive(rate, "gamma rate");
  }
  double sample(RngStream& rng) const { return detail::standard_gamma(shape, rng) / rate; }
  double log_pdf(double x) const {
    if (!(x > 0.0)) return -INFINITY;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
  }
  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

/// Inverse gamma IG(shape, scale): X = 1/Y with Y ~ Gamma(shape, rate = scale);
/// mean scale/(shape - 1).
struct InvGammaLaw {
  double shape;
  double scale;

  void validate() const {
    detail::require_positive(shape, "inverse-gamma shape");
    detail::require_positive(scale, "inverse-gamma scale");
  }
  double sample(RngStream& rng) const { return scale / detail::standard_gamma(shape, rng); }
  double log_pdf(double x) const {
    if (!(x > 0.0)) return -INFINITY;
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
  }
  double mean() const { return shape > 1.0 ? scale / (shape - 1.0) : INFINITY; }
};

struct NormalLaw {
  double mean;
  double variance;

  void validate() const { detail::require_positive(variance, "normal variance"); }
  double sample(RngStream& rng) const { return mean + std::sqrt(variance) * rng.normal(); }
  double log_pdf(double x) const {
    const double d = x - mean;
    return -detail::kLogSqrt2Pi - 0.5 * std::log(variance) - 0.5 * d * d / variance;
  }
};

/// Generalized inverse Gaussian with density
///   (xi/psi)^{zeta/2} / (2 K_zeta(sqrt(xi psi))) v^{zeta-1} exp(-(xi v + psi/v)/2),  v > 0.
/// Note `xi` multiplies v and `psi` divides it.
struct GigParams {
  double zeta;
  double xi;
  double psi;

  void validate() const {
    if (!std::isfinite(zeta)) throw DomainError("GIG order must be finite");
    detail::require_positive(xi, "GIG xi");
    detail::require_positive(psi, "GIG psi");
  }
  double omega() const { return std::sqrt(xi * psi); }
  double log_normalizer() const {
    return 0.5 * zeta * (std::log(xi) - std::log(psi)) - std::numbers::ln2 - log_bessel_k(zeta, omega());
  }
  double log_pdf(double v) const {
    if (!(v > 0.0)) return -INFINITY;
    return log_normalizer() + (zeta - 1.0) * std::log(v) - 0.5 * (xi * v + psi / v);
  }
  double mean() const { return std::sqrt(psi / xi) * bessel_k_ratio(zeta + 1.0, zeta, omega()); }
  double variance() const {
    const double w = omega();
    const double r1 = bessel_k_ratio(zeta + 1.0, zeta, w);
    const double r2 = bessel_k_ratio(zeta + 2.0, zeta, w);
    return psi / xi * (r2 - r1 * r1);
  }
  double sample(RngStream& rng, std::uint64_t cap = kDefaultRejectionCap) const {
    const double scale = std::sqrt(psi / xi);
    const double y = detail::standard_gig(std::abs(zeta), omega(), rng, cap);
    return zeta < 0.0 ? scale / y : scale * y;
  }
};

/// Snedecor F(nu1, nu2) as a ratio of scaled chi-square variates.
struct FLaw {
  double nu1;
  double nu2;

  void validate() const {
    detail::require_positive(nu1, "F numerator dof");
    detail::require_positive(nu2, "F denominator dof");
  }
  double sample(RngStream& rng) const {
    const double a = detail::standard_gamma(0.5 * nu1, rng) / nu1;
    const double b = detail::standard_gamma(0.5 * nu2, rng) / nu2;
    return a / b;
  }
  double log_pdf(double x) const {
    if (!(x > 0.0)) return -INFINITY;
    const double h1 = 0.5 * nu1;
    const double h2 = 0.5 * nu2;
    return std::lgamma(h1 + h2) - std::lgamma(h1) - std::lgamma(h2) + h1 * std::log(nu1 / nu2) +
           (h1 - 1.0) * std::log(x) - (h1 + h2) * std::log1p(nu1 * x / nu2);
  }
  double mean() const { return nu2 > 2.0 ? nu2 / (nu2 - 2.0) : INFINITY; }
  double variance() const {
    if (!(nu2 > 4.0)) return INFINITY;
    return 2.0 * nu2 * nu2 * (nu1 + nu2 - 2.0) / (nu1 * (nu2 - 2.0) * (nu2 - 2.0) * (nu2 - 4.0));
  }
};

// ---------------------------------------------------------------------------
// Multivariate normal

/// N(mean, covariance) with a cached (possibly jittered) Cholesky factor.
struct MvnLaw {
  Vector mean;
  Eigen::LLT<Matrix> chol;
  double jitter = 0.0;

  MvnLaw(Vector m, const Matrix& covariance) : mean(std::move(m)) {
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
      throw PreconditionError("sample_mvn: covariance shape does not match mean");
    if (!is_symmetric(covariance)) throw PreconditionError("sample_mvn: covariance is not symmetric");
    chol = robust_cholesky(covariance, &jitter);
  }
  Vector sample(RngStream& rng) const {
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return mean + chol.matrixL() * z;
  }
};

/// N(P^{-1} b, P^{-1}) parameterized by its precision P; draws use only the
/// factor of P.
struct MvnPrecisionLaw {
  Vector mean;
  Eigen::LLT<Matrix> chol;
  double jitter = 0.0;

  MvnPrecisionLaw(const Matrix& precision, const Vector& linear) {
    if (precision.rows() != linear.size() || precision.cols() != linear.size())
      throw PreconditionError("mvn precision: shape mismatch");
    chol = robust_cholesky(precision, &jitter);
    mean = chol.solve(linear);
  }
  Vector sample(RngStream& rng) const {
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return mean + chol.matrixU().solve(z);
  }
  Matrix covariance() const { return chol.solve(Matrix::Identity(mean.size(), mean.size())); }
  double log_pdf(const Vector& x) const {
    const Vector d = chol.matrixU() * (x - mean);
    const double logdet_half = chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -static_cast<double>(mean.size()) * detail::kLogSqrt2Pi + logdet_half - 0.5 * d.squaredNorm();
  }
};

// ---------------------------------------------------------------------------
// Free-function sampling surface

inline double sample_gamma(double shape, double rate, RngStream& rng) {
  const GammaLaw law{shape, rate};
  law.validate();
  return law.sample(rng);
}

/// IG(shape, scale) = 1 / Gamma(shape, rate = scale).
inline double sample_inv_gamma(double shape, double scale, RngStream& rng) {
  const InvGammaLaw law{shape, scale};
  law.validate();
  return law.sample(rng);
}

inline double sample_gig(const GigParams& p, RngStream& rng) {
  p.validate();
  return p.sample(rng);
}

inline double sample_f(double nu1, double nu2, RngStream& rng) {
  const FLaw law{nu1, nu2};
  law.validate();
  return law.sample(rng);
}

inline Vector sample_mvn(const Vector& mean, const Matrix& covariance, RngStream& rng) {
  return MvnLaw(mean, covariance).sample(rng);
}

/// Standard Laplace (density e^{-|x|}/2).
inline double sample_laplace(RngStream& rng) {
  const double e = rng.exponential();
  return rng.uniform() < 0.5 ? -e : e;
}

}  // namespace hsg
