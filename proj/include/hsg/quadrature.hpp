#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>

#include "hsg/errors.hpp"

namespace hsg {

/// log of the integral of exp(log_f(t)) over the real line, for a unimodal
/// log-integrand. The support is located by scanning outward from the peak
/// until log_f drops `drop` nats below it; the interior is then integrated by
/// adaptive Gauss-Kronrod.
struct LogIntegral {
  double log_value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double rel_error = 0.0;
};

inline LogIntegral integrate_exp(const std::function<double(double)>& log_f, double center, double half_width = 60.0,
                                 double step = 0.02, double drop = 46.0, double max_extent = 2000.0) {
  double peak_t = center;
  double peak = -std::numeric_limits<double>::infinity();
  for (double t = center - half_width; t <= center + half_width; t += step) {
    const double v = log_f(t);
    if (v > peak) {
      peak = v;
      peak_t = t;
    }
  }
  if (!std::isfinite(peak)) throw NumericalError("integrate_exp: integrand vanishes on the search window");
  // refine the peak locally so a narrow spike is not missed between scan points
  for (double t = peak_t - step; t <= peak_t + step; t += step / 64.0) {
    const double v = log_f(t);
    if (v > peak) {
      peak = v;
      peak_t = t;
    }
  }
  auto walk = [&](double dir) {
    double t = peak_t;
    double h = step;
    while (log_f(t) > peak - drop) {
      t += dir * h;
      h *= 1.05;
      if (std::abs(t - peak_t) > max_extent) throw NumericalError("integrate_exp: mass leaks beyond the integration window");
    }
    return t;
  };
  LogIntegral out;
  out.lower = walk(-1.0);
  out.upper = walk(1.0);
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double t) { return std::exp(log_f(t) - peak); }, out.lower, out.upper, 20, 1e-13, &err);
  if (!(v > 0.0)) throw NumericalError("integrate_exp: nonpositive integral");
  out.log_value = peak + std::log(v);
  out.rel_error = err / v;
  return out;
}

/// Integral of f over [lo, hi] by adaptive Gauss-Kronrod.
inline double integrate(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12,
                        double* error = nullptr) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, tol, &err);
  if (error) *error = err;
  return v;
}

}  // namespace hsg
