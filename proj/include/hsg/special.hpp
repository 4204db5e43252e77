#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "hsg/errors.hpp"

namespace hsg {

namespace detail {

// 1/Gamma(1 - mu), 1/Gamma(1 + mu) and Temme's auxiliaries
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu),  gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
// for |mu| <= 1/2.
struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

inline TemmeGammas temme_gammas(double mu) {
  const long double gampl = 1.0L / std::tgamma(1.0L + mu);
  const long double gammi = 1.0L / std::tgamma(1.0L - mu);
  TemmeGammas g{};
  g.gampl = static_cast<double>(gampl);
  g.gammi = static_cast<double>(gammi);
  g.gam2 = static_cast<double>(0.5L * (gammi + gampl));
  if (std::abs(mu) < 1e-4) {
    // Odd part of the Taylor series of 1/Gamma(1+x): x*gamma + c3*x^3 + ...
    constexpr double c3 = -0.0420026350340952;
    g.gam1 = -std::numbers::egamma - c3 * mu * mu;
  } else {
    g.gam1 = static_cast<double>((gammi - gampl) / (2.0L * mu));
  }
  return g;
}

// Value represented as mantissa * exp(log_scale), used to keep the upward
// recurrence finite for large orders.
struct ScaledValue {
  double mantissa;
  double log_scale;
  double log() const { return std::log(mantissa) + log_scale; }
};

// K_nu(x) for nu >= 0, x > 0, returned as e^{-x} times a scaled mantissa.
// Temme's series for x <= 2, Steed's continued fraction (CF2) above, then
// forward recurrence in the order.
inline ScaledValue bessel_k_impl(double nu, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kPi = std::numbers::pi;
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - nl;
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  double kmu = 0.0;  // K_mu(x) * e^x
  double k1 = 0.0;   // K_{mu+1}(x) * e^x
  if (x <= 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * i - mu2);
      c *= d / i;
      p /= i - mu;
      q /= i + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("bessel_k: series did not converge");
    const double ex = std::exp(x);
    kmu = sum * ex;
    k1 = sum1 * xi2 * ex;
  } else {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
      a -= 2 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("bessel_k: continued fraction did not converge");
    h = a1 * h;
    kmu = std::sqrt(kPi / (2.0 * x)) / s;
    k1 = kmu * (mu + x + 0.5 - h) * xi;
  }

  double log_scale = -x;
  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * xi2 * k1 + kmu;
    kmu = k1;
    k1 = next;
    if (k1 > 1e250) {
      kmu *= 1e-250;
      k1 *= 1e-250;
      log_scale += 250.0 * std::numbers::ln10;
    }
  }
  return {kmu, log_scale};
}

}  // namespace detail

/// Natural log of the modified Bessel function of the second kind, K_order(x).
/// Finite for every real order and x > 0, including regimes where K itself
/// over- or underflows.
inline double log_bessel_k(double order, double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("bessel_k: argument must be positive and finite, got " + std::to_string(x));
  if (!std::isfinite(order)) throw DomainError("bessel_k: order must be finite");
  return detail::bessel_k_impl(std::abs(order), x).log();
}

/// K_order(x), relative accuracy ~1e-14 away from over/underflow.
inline double bessel_k(double order, double x) { return std::exp(log_bessel_k(order, x)); }

/// K_{num}(x) / K_{den}(x) computed in log space.
inline double bessel_k_ratio(double num, double den, double x) {
  return std::exp(log_bessel_k(num, x) - log_bessel_k(den, x));
}

}  // namespace hsg
