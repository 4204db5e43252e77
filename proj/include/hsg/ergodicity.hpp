#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "hsg/errors.hpp"
#include "hsg/linalg.hpp"
#include "hsg/models/glmm.hpp"
#include "hsg/models/smn.hpp"

namespace hsg {

enum class Algorithm { SS, HS };

inline std::string to_string(Algorithm a) { return a == Algorithm::SS ? "SS" : "HS"; }

enum class Verdict { Established, NotEstablished };

inline std::string to_string(Verdict v) { return v == Verdict::Established ? "Established" : "NotEstablished"; }

/// Decimal rendering with at most six places and trailing zeros removed
/// (76, -36.5, 1.207107).
inline std::string format_threshold(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

/// One sufficient condition. `quantity` is the name of the supplied value,
/// e.g. "a0"; `required` is the threshold (NaN when the condition carries no
/// threshold).
struct Condition {
  std::string name;
  std::string quantity;
  std::string relation = ">";
  double required = NAN;
  double supplied = NAN;
  bool pass = false;
  std::string alternative;  // second branch of an "either ... or ..." condition, already rendered
  std::string note;

  std::string text() const {
    std::string out = name + ": ";
    if (std::isnan(required) && alternative.empty()) {
      out += note.empty() ? "no condition" : note;
    } else {
      out += "required " + quantity + " " + relation + " " + format_threshold(required);
      if (!alternative.empty()) out += " or " + alternative;
      out += ", supplied " + format_threshold(supplied);
    }
    return out + ": " + (pass ? "pass" : "fail");
  }
};

struct ErgodicityReport {
  std::string model;
  Algorithm algorithm = Algorithm::HS;
  Verdict verdict = Verdict::NotEstablished;
  std::vector<Condition> conditions;
  std::string footer =
      "Conditions are sufficient only; NotEstablished does not mean the chain fails to be geometrically "
      "ergodic. The hybrid-scan conditions hold for every selection probability r in (0, 1).";

  void finalize() {
    bool all = !conditions.empty();
    for (const Condition& c : conditions) all = all && c.pass;
    verdict = all ? Verdict::Established : Verdict::NotEstablished;
  }

  std::string text() const {
    std::string out = "model: " + model + "\nalgorithm: " + to_string(algorithm) + "\n";
    for (const Condition& c : conditions) out += "  " + c.text() + "\n";
    out += "verdict: " + to_string(verdict) + "\n" + footer + "\n";
    return out;
  }
};

/// Sufficient conditions for geometric ergodicity of the hybrid-scan Gibbs
/// sampler for the GLMM: Z of full column rank,
/// a0 > (rank(X) - N + (2c + 1) p + 2) / 2 and a_i > 1 for every random factor.
inline ErgodicityReport check_glmm(const GlmmModel& model) {
  ErgodicityReport rep;
  rep.model = "glmm";
  rep.algorithm = Algorithm::HS;
  const GlmmHyper& h = model.hyper();

  Condition rank;
  rank.name = "Z full column rank";
  rank.quantity = "rank(Z)";
  rank.relation = "=";
  rank.required = static_cast<double>(model.q());
  rank.supplied = static_cast<double>(numerical_rank(model.z()));
  rank.pass = rank.supplied == rank.required;
  rep.conditions.push_back(rank);

  const double rank_x = static_cast<double>(numerical_rank(model.x()));
  const double n = static_cast<double>(model.n_obs());
  const double p = static_cast<double>(model.p());
  Condition a0;
  a0.name = "a0 bound";
  a0.quantity = "a0";
  a0.required = 0.5 * (rank_x - n + (2.0 * h.c + 1.0) * p + 2.0);
  a0.supplied = h.a[0];
  a0.pass = a0.supplied > a0.required;
  a0.note = "rank(X) = " + format_threshold(rank_x);
  rep.conditions.push_back(a0);

  for (Eigen::Index i = 1; i <= model.m(); ++i) {
    Condition ai;
    ai.name = "a" + std::to_string(i) + " bound";
    ai.quantity = "a" + std::to_string(i);
    ai.required = 1.0;
    ai.supplied = h.a[static_cast<std::size_t>(i)];
    ai.pass = ai.supplied > ai.required;
    rep.conditions.push_back(ai);
  }
  rep.finalize();
  return rep;
}

/// (4 - m + sqrt(m (m + 2))) / 4: the SS bound on alpha for inverse-gamma mixing.
inline double invgamma_ss_alpha_threshold(double m) { return (4.0 - m + std::sqrt(m * (m + 2.0))) / 4.0; }

/// Sufficient conditions for the SMN regression under SS or HS Gibbs. The
/// thresholds involve alpha of the IG(alpha, gamma) prior on sigma2.
inline ErgodicityReport check_smn(const SmnModel& model, Algorithm algorithm) {
  ErgodicityReport rep;
  rep.model = "smn";
  rep.algorithm = algorithm;
  const double m = static_cast<double>(model.m());
  const double alpha = model.alpha();

  Condition c;
  if (const auto* t = std::get_if<StudentTMixing>(&model.mixing())) {
    if (algorithm == Algorithm::HS) {
      c.name = "Student's t mixing";
      c.note = "no additional condition";
      c.pass = true;
    } else {
      c.name = "Student's t mixing, nu";
      c.quantity = "nu";
      const double denom = m + 2.0 * alpha - 3.0;
      const double upper = (2.0 * alpha - 2.0) / m;
      c.supplied = t->nu;
      c.alternative = "nu < " + format_threshold(upper);
      if (denom > 0.0) {
        c.required = 1.0 / denom;
        c.pass = t->nu > c.required || t->nu < upper;
      } else {
        c.required = INFINITY;
        c.note = "m + 2 alpha - 3 <= 0, first branch unavailable";
        c.pass = t->nu < upper;
      }
    }
  } else if (std::holds_alternative<InvGammaMixing>(model.mixing())) {
    c.name = "inverse-gamma mixing, alpha";
    c.quantity = "alpha";
    c.supplied = alpha;
    c.required = algorithm == Algorithm::HS ? 1.0 : invgamma_ss_alpha_threshold(m);
    c.pass = alpha > c.required;
  } else {
    c.name = "custom mixing";
    c.note = "no closed-form condition";
    c.pass = false;
  }
  rep.conditions.push_back(c);
  rep.finalize();
  return rep;
}

/// Drift function V(beta, sigma2) = ||y - X beta||^2 + beta^T Sigma^{-1} beta + sigma2 + 1/sigma2.
inline double drift_V(const Vector& beta, double sigma2, const SmnModel& model) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("drift_V: sigma2 must be positive");
  if (beta.size() != model.p()) throw PreconditionError("drift_V: beta must have length p");
  return sum_of_squares(model.residuals(beta)) + beta.dot(model.prior_precision() * beta) + sigma2 + 1.0 / sigma2;
}

}  // namespace hsg
