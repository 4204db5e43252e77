#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "hsg/distributions.hpp"
#include "hsg/errors.hpp"

namespace hsg {

/// Two-variable toy target f(u, z) = phi(u - z) * exp(-|z|) / 2: U | Z ~ N(z, 1)
/// with Z standard Laplace. The chain state is u; z is the latent.
struct ToyLaplaceState {
  double u = 0.0;
};

/// Rejection sampler for Z | U = u, density prop. to exp(-(u - z)^2/2 - |z|).
///
/// The candidate is a standard Laplace shifted to `center`; `log_bound` is the
/// supremum of log target - log candidate, so acceptance uses
/// log U <= -(u - z)^2/2 - |z| + |z - center| - log_bound.
struct ToyLatentLaw {
  double u;
  double center;
  double log_bound;

  static ToyLatentLaw given(double u) {
    if (!std::isfinite(u)) throw DomainError("toy Laplace: u must be finite");
    if (u > 1.0) return {u, u - 1.0, 1.0 - u};
    if (u < -1.0) return {u, u + 1.0, 1.0 + u};
    return {u, 0.0, 0.0};
  }

  double log_ratio(double z) const { return -0.5 * (u - z) * (u - z) - std::abs(z) + std::abs(z - center) - log_bound; }

  double sample(RngStream& rng, std::uint64_t cap = kDefaultRejectionCap, std::uint64_t* trials = nullptr) const {
    for (std::uint64_t t = 1; t <= cap; ++t) {
      const double z = center + sample_laplace(rng);
      if (std::log(rng.uniform()) <= log_ratio(z)) {
        if (trials) *trials += t;
        return z;
      }
    }
    throw RejectionCapError("toy Laplace latent sampler exceeded trial cap");
  }

  /// Exact log density of Z | U = u (normalized).
  double log_pdf(double z) const { return -0.5 * (u - z) * (u - z) - std::abs(z) - toy_log_norm(u); }

  /// log of int exp(-(u - z)^2/2 - |z|) dz.
  static double toy_log_norm(double u) {
    // sqrt(2 pi) * e^{1/2} * [e^{-u} Phi(u - 1) + e^{u} Phi(-u - 1)], evaluated stably
    const double a = -u + std::log(0.5 * std::erfc(-(u - 1.0) / std::numbers::sqrt2));
    const double b = u + std::log(0.5 * std::erfc((u + 1.0) / std::numbers::sqrt2));
    const double hi = std::max(a, b);
    return 0.5 * std::log(2.0 * std::numbers::pi) + 0.5 + hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  }
};

class ToyLaplaceModel {
 public:
  /// U | Z = z ~ N(z, 1).
  NormalLaw u_law(double z) const {
    if (!std::isfinite(z)) throw DomainError("toy Laplace: z must be finite");
    return {z, 1.0};
  }

  ToyLatentLaw z_law(double u) const { return ToyLatentLaw::given(u); }

  /// log f(u, z), normalized.
  double log_joint(double u, double z) const {
    return -0.5 * (u - z) * (u - z) - detail::kLogSqrt2Pi - std::abs(z) - std::numbers::ln2;
  }

  /// log f_U(u), normalized (closed form of the convolution).
  double log_marginal_u(double u) const {
    return ToyLatentLaw::toy_log_norm(u) - detail::kLogSqrt2Pi - std::numbers::ln2;
  }

  /// Exact draw from the target: z Laplace, then u | z.
  ToyLaplaceState initial_state(RngStream& rng) const {
    const double z = sample_laplace(rng);
    return {z + rng.normal()};
  }

  std::vector<std::string> param_names() const { return {"u"}; }
};

}  // namespace hsg
