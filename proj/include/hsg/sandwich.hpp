#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hsg/distributions.hpp"
#include "hsg/errors.hpp"
#include "hsg/models/glmm.hpp"
#include "hsg/models/student_t.hpp"
#include "hsg/quadrature.hpp"

namespace hsg {

// ---------------------------------------------------------------------------
// Student's t: scalings z -> g z of the latent precisions

/// Density of g prop. to f_{Z|mu}(g z | mu) g^{m-1}: Gamma(m nu / 2, nu z. / 2).
inline GammaLaw t_group_move_mu_law(const TLatentStats& z, double nu, Eigen::Index m) {
  detail::require_positive(nu, "nu");
  detail::require_positive(z.z_dot, "z.");
  return {0.5 * static_cast<double>(m) * nu, 0.5 * nu * z.z_dot};
}

inline double t_group_move_mu(const TLatentStats& z, double nu, Eigen::Index m, RngStream& rng) {
  return t_group_move_mu_law(z, nu, m).sample(rng);
}

/// Density of g prop. to f_{Z|sigma2}(g z | sigma2) g^{m-1} (mu integrated out
/// under the flat prior): Gamma((m(nu+1) - 1)/2, z. (v/(2 sigma2) + nu/2)).
inline GammaLaw t_group_move_sigma_law(const TLatentStats& z, double sigma2, double nu, Eigen::Index m) {
  detail::require_positive(nu, "nu");
  detail::require_positive(sigma2, "sigma2");
  detail::require_positive(z.z_dot, "z.");
  const double md = static_cast<double>(m);
  return {0.5 * (md * (nu + 1.0) - 1.0), z.z_dot * (0.5 * z.v_zw / sigma2 + 0.5 * nu)};
}

inline double t_group_move_sigma(const TLatentStats& z, double sigma2, double nu, Eigen::Index m, RngStream& rng) {
  return t_group_move_sigma_law(z, sigma2, nu, m).sample(rng);
}

// ---------------------------------------------------------------------------
// GLMM: scaling tau -> g tau with an F candidate

/// Everything the accept/reject sampler for the GLMM group move needs.
///
/// The target is h(g) prop. to g^{shape - 1} (1 + C g)^{-power} exp(-g d sum(tau))
/// with shape = N/2 + c p + a0 and power = (N + p)/2 + a0. The candidate is
/// V = V* nu1 / (C nu2), V* ~ F(nu1, nu2), and the ratio h / candidate is
/// maximized at g_hat = s / (d sum(tau)).
struct GlmmSandwichParams {
  double C = 0.0;
  double s = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double g_hat = 0.0;
  double d = 1.0;
  double tau_sum = 0.0;
  double shape = 0.0;
  double power = 0.0;
  double s_lower = 0.0;
  double s_upper = 0.0;

  void validate() const {
    detail::require_positive(C, "sandwich C");
    detail::require_positive(tau_sum, "sum(tau)");
    detail::require_positive(d, "d");
    if (!(s > s_lower && s < s_upper))
      throw PreconditionError("sandwich s must lie strictly inside (" + std::to_string(s_lower) + ", " +
                              std::to_string(s_upper) + ")");
    detail::require_positive(nu1, "sandwich nu1");
    detail::require_positive(nu2, "sandwich nu2");
  }

  /// log h(g) up to a constant.
  double log_target(double g) const {
    if (!(g > 0.0)) return -INFINITY;
    return (shape - 1.0) * std::log(g) - power * std::log1p(C * g) - g * d * tau_sum;
  }

  /// log of the normalized candidate density of V.
  double log_candidate(double g) const {
    const double k = C * nu2 / nu1;
    return FLaw{nu1, nu2}.log_pdf(g * k) + std::log(k);
  }

  /// log of the acceptance probability of a candidate g (always <= 0, = 0 at g_hat).
  double log_accept_ratio(double g) const {
    const double x = d * g * tau_sum;
    return s * std::log(x / s) + s - x;
  }

  /// Probability that one candidate is accepted, by quadrature on the log scale.
  double acceptance_probability() const {
    const LogIntegral li = integrate_exp(
        [&](double t) {
          const double g = std::exp(t);
          return log_candidate(g) + log_accept_ratio(g) + t;
        },
        std::log(g_hat));
    return std::exp(li.log_value);
  }
};

enum class SChoice { ModeMatch, Midpoint, GridSearch };

namespace detail {

inline GlmmSandwichParams glmm_params_for_s(double n, double p, double c, double a0, double C, double tau_sum, double d,
                                            double s) {
  GlmmSandwichParams g;
  g.C = C;
  g.d = d;
  g.tau_sum = tau_sum;
  g.s_lower = std::max(0.0, p * (c - 0.5));
  g.s_upper = 0.5 * n + c * p + a0;
  g.s = s;
  g.nu1 = n + 2.0 * c * p + 2.0 * a0 - 2.0 * s;
  g.nu2 = p * (1.0 - 2.0 * c) + 2.0 * s;
  g.g_hat = s / (d * tau_sum);
  g.shape = 0.5 * n + c * p + a0;
  g.power = 0.5 * (n + p) + a0;
  return g;
}

}  // namespace detail

/// Mode of h(g) prop. to g^{shape - 1} (1 + C g)^{-power} exp(-g D), the positive
/// root of D C g^2 + (C (power - shape + 1) + D) g - (shape - 1) = 0.
inline double glmm_target_mode(double shape, double power, double C, double D) {
  if (!(shape > 1.0)) return 0.0;
  const double b = C * (power - shape + 1.0) + D;
  return 2.0 * (shape - 1.0) / (b + std::sqrt(b * b + 4.0 * D * C * (shape - 1.0)));
}

/// Free parameter s of the F candidate, inside the admissible interval
/// (max{0, p(c - 1/2)}, N/2 + c p + a0):
///  - ModeMatch puts the envelope's touching point g_hat = s / (d sum(tau)) at
///    the mode of h, clamped 0.1% inside the interval;
///  - Midpoint is the interval midpoint;
///  - GridSearch is the best of 16 interior grid points by quadrature-evaluated
///    acceptance probability.
inline double choose_s(double n, double p, double c, double a0, double C, double tau_sum, double d = 1.0,
                       SChoice choice = SChoice::ModeMatch) {
  const double lo = std::max(0.0, p * (c - 0.5));
  const double hi = 0.5 * n + c * p + a0;
  if (!(hi > lo)) throw PreconditionError("choose_s: empty admissible interval");
  const double mid = 0.5 * (lo + hi);
  if (choice == SChoice::Midpoint) return mid;
  if (choice == SChoice::ModeMatch) {
    const double D = d * tau_sum;
    const double mode = glmm_target_mode(0.5 * n + c * p + a0, 0.5 * (n + p) + a0, C, D);
    const double margin = 1e-3 * (hi - lo);
    return std::clamp(D * mode, lo + margin, hi - margin);
  }
  double best_s = mid;
  double best_acc = -1.0;
  for (int k = 1; k <= 16; ++k) {
    const double s = lo + (hi - lo) * k / 17.0;
    const double acc = detail::glmm_params_for_s(n, p, c, a0, C, tau_sum, d, s).acceptance_probability();
    if (acc > best_acc) {
      best_acc = acc;
      best_s = s;
    }
  }
  return best_s;
}

/// Sandwich parameters for the current (theta, tau); C = (||y - W theta||^2 + 2 b0) / (beta^T D_tau^{-1} beta).
inline GlmmSandwichParams glmm_sandwich_params(const GlmmModel& model, const Vector& theta, const Vector& tau,
                                               SChoice choice = SChoice::ModeMatch) {
  const double quad = model.beta_quadratic(theta, tau);
  if (!(quad > 0.0)) throw NumericalError("GLMM group move: beta^T D_tau^{-1} beta is zero");
  const double C = (model.residual_ss(theta) + 2.0 * model.hyper().b[0]) / quad;
  const double tau_sum = pairwise_sum(tau);
  const double n = static_cast<double>(model.n_obs());
  const double p = static_cast<double>(model.p());
  const GlmmHyper& h = model.hyper();
  const double s = choose_s(n, p, h.c, h.a[0], C, tau_sum, h.d, choice);
  GlmmSandwichParams out = detail::glmm_params_for_s(n, p, h.c, h.a[0], C, tau_sum, h.d, s);
  out.validate();
  return out;
}

/// Accept/reject draw of g ~ h. `trials` (if given) is incremented by the
/// number of candidates used.
inline double glmm_group_move(const GlmmSandwichParams& params, RngStream& rng, std::uint64_t* trials = nullptr,
                              std::uint64_t cap = kDefaultRejectionCap) {
  const FLaw f{params.nu1, params.nu2};
  const double to_g = params.nu1 / (params.C * params.nu2);
  for (std::uint64_t t = 1; t <= cap; ++t) {
    const double g = f.sample(rng) * to_g;
    if (std::log(rng.uniform()) <= params.log_accept_ratio(g)) {
      if (trials) *trials += t;
      return g;
    }
  }
  if (trials) *trials += cap;
  throw RejectionCapError("GLMM group move exceeded " + std::to_string(cap) + " candidate trials");
}

// ---------------------------------------------------------------------------
// Toy Laplace

/// Fresh standard Laplace draw restricted to the half-line holding z, with
/// z = 0 belonging to (-inf, 0].
inline double toy_laplace_sandwich_move(double z, RngStream& rng) {
  const double e = rng.exponential();
  return z > 0.0 ? e : -e;
}

/// Transition density r(z' | z) of the move above.
inline double toy_laplace_move_density(double z_to, double z_from) {
  const bool same_side = (z_from > 0.0) == (z_to > 0.0);
  return same_side ? std::exp(-std::abs(z_to)) : 0.0;
}

}  // namespace hsg
