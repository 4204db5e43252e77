#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hsg/errors.hpp"
#include "hsg/format.hpp"
#include "hsg/linalg.hpp"
#include "hsg/models/glmm.hpp"
#include "hsg/scans.hpp"

namespace hsg {

inline double sample_mean(const Vector& x) {
  if (x.size() == 0) throw PreconditionError("mean of an empty series");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double sample_variance(const Vector& x) {
  if (x.size() < 2) throw PreconditionError("variance needs at least two values");
  const double m = sample_mean(x);
  const Vector d = (x.array() - m).matrix();
  return sum_of_squares(d) / static_cast<double>(x.size() - 1);
}

/// Sample autocorrelations at lags 0..max_lag: centered on the series mean,
/// normalized by the lag-0 sum (n-denominator form).
inline Vector autocorrelation(const Vector& series, std::size_t max_lag) {
  const auto n = static_cast<std::size_t>(series.size());
  if (n <= max_lag + 1) throw PreconditionError("autocorrelation: series length must exceed max_lag + 1");
  const double mean = sample_mean(series);
  const Vector d = (series.array() - mean).matrix();
  const double c0 = sum_of_squares(d);
  if (!(c0 > 0.0) || c0 <= 1e-300 * static_cast<double>(n))
    throw NumericalError("autocorrelation: series has zero variance");
  Vector acf(static_cast<Eigen::Index>(max_lag + 1));
  acf(0) = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    const Eigen::Index len = static_cast<Eigen::Index>(n - k);
    const Vector prod = d.head(len).cwiseProduct(d.segment(static_cast<Eigen::Index>(k), len));
    acf(static_cast<Eigen::Index>(k)) = pairwise_sum(prod) / c0;
  }
  return acf;
}

/// Batch-means estimate of the asymptotic variance of the sample mean
/// (sigma^2 in sqrt(n)(mean - mu) -> N(0, sigma^2)) for a forced batch size.
/// Trailing values that do not fill a batch are dropped.
inline double batch_means_asymp_var(const Vector& series, std::size_t batch_size) {
  const auto n = static_cast<std::size_t>(series.size());
  if (batch_size < 1) throw PreconditionError("batch size must be >= 1");
  const std::size_t batches = n / batch_size;
  if (batches < 2) throw PreconditionError("batch means need at least two batches");
  Vector means(static_cast<Eigen::Index>(batches));
  for (std::size_t b = 0; b < batches; ++b)
    means(static_cast<Eigen::Index>(b)) =
        pairwise_sum(std::span<const double>(series.data() + b * batch_size, batch_size)) /
        static_cast<double>(batch_size);
  return static_cast<double>(batch_size) * sample_variance(means);
}

/// Batch-means asymptotic variance with floor(sqrt(n)) batches.
inline double batch_means_asymp_var(const Vector& series) {
  const auto n = static_cast<std::size_t>(series.size());
  if (n < 100) throw PreconditionError("batch means need a series of length >= 100");
  const auto batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  return batch_means_asymp_var(series, n / batches);
}

/// Monte Carlo standard error of the sample mean from batch means.
inline double batch_means_se(const Vector& series) {
  return std::sqrt(batch_means_asymp_var(series) / static_cast<double>(series.size()));
}

inline double effective_sample_size(const Vector& series) {
  return static_cast<double>(series.size()) * sample_variance(series) / batch_means_asymp_var(series);
}

/// Delete-a-block jackknife standard error of the lag-`lag` autocorrelation.
/// Block j removes every lagged pair with an endpoint inside block j.
inline double acf_jackknife_se(const Vector& series, std::size_t lag, std::size_t n_blocks = 100) {
  const auto n = static_cast<std::size_t>(series.size());
  if (n_blocks < 2 || n < n_blocks * (lag + 2)) throw PreconditionError("acf_jackknife_se: series too short");
  const std::size_t block = n / n_blocks;
  auto block_of = [&](std::size_t t) { return std::min(t / block, n_blocks - 1); };

  // Per-block partial sums so each deleted-block estimate is O(lag + n_blocks).
  std::vector<double> s1(n_blocks, 0.0), s2(n_blocks, 0.0);
  std::vector<double> pxy(n_blocks, 0.0), px(n_blocks, 0.0), py(n_blocks, 0.0), pc(n_blocks, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t b = block_of(t);
    s1[b] += series(static_cast<Eigen::Index>(t));
    s2[b] += series(static_cast<Eigen::Index>(t)) * series(static_cast<Eigen::Index>(t));
    if (t + lag < n && block_of(t + lag) == b) {
      const double x = series(static_cast<Eigen::Index>(t));
      const double y = series(static_cast<Eigen::Index>(t + lag));
      pxy[b] += x * y;
      px[b] += x;
      py[b] += y;
      pc[b] += 1.0;
    }
  }
  // pairs straddling consecutive blocks (b, b+1) are stored separately
  std::vector<double> cxy(n_blocks, 0.0), cx(n_blocks, 0.0), cy(n_blocks, 0.0), cc(n_blocks, 0.0);
  for (std::size_t t = 0; t + lag < n; ++t) {
    const std::size_t b = block_of(t);
    if (block_of(t + lag) != b) {
      const double x = series(static_cast<Eigen::Index>(t));
      const double y = series(static_cast<Eigen::Index>(t + lag));
      cxy[b] += x * y;
      cx[b] += x;
      cy[b] += y;
      cc[b] += 1.0;
    }
  }
  auto total = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  const double T1 = total(s1), T2 = total(s2), Txy = total(pxy) + total(cxy), Tx = total(px) + total(cx),
               Ty = total(py) + total(cy), Tc = total(pc) + total(cc);
  std::vector<double> est(n_blocks);
  for (std::size_t j = 0; j < n_blocks; ++j) {
    const double cnt = static_cast<double>(j + 1 == n_blocks ? n - j * block : block);
    const double m1 = T1 - s1[j];
    const double m2 = T2 - s2[j];
    const double nn = static_cast<double>(n) - cnt;
    double xy = Txy - pxy[j] - cxy[j];
    double x = Tx - px[j] - cx[j];
    double y = Ty - py[j] - cy[j];
    double c = Tc - pc[j] - cc[j];
    if (j > 0) {  // pairs starting in block j-1 and ending in block j
      xy -= cxy[j - 1];
      x -= cx[j - 1];
      y -= cy[j - 1];
      c -= cc[j - 1];
    }
    const double mean = m1 / nn;
    const double num = xy - mean * (x + y) + c * mean * mean;
    const double den = m2 - nn * mean * mean;
    est[j] = num / den;
  }
  double avg = 0.0;
  for (double e : est) avg += e;
  avg /= static_cast<double>(n_blocks);
  double ss = 0.0;
  for (double e : est) ss += (e - avg) * (e - avg);
  return std::sqrt(static_cast<double>(n_blocks - 1) / static_cast<double>(n_blocks) * ss);
}

// ---------------------------------------------------------------------------
// Lag-normalized comparison tables

struct AcfRow {
  std::size_t k;
  std::string scan;
  std::size_t lag;
  double acf;
};

struct AcfTable {
  std::string test_function;
  std::vector<std::string> scans;
  std::vector<AcfRow> rows;

  std::string to_csv() const;
  /// Plain-text summary naming the scan with the smallest |ACF| at every k.
  std::string summary() const;
  double at(std::size_t k, const std::string& scan) const {
    for (const AcfRow& r : rows)
      if (r.k == k && r.scan == scan) return r.acf;
    throw PreconditionError("AcfTable: no row for k=" + std::to_string(k) + " scan=" + scan);
  }
};

inline std::string AcfTable::to_csv() const {
  std::string out = "k,scan,lag,acf\n";
  for (const AcfRow& r : rows)
    out += std::to_string(r.k) + "," + r.scan + "," + std::to_string(r.lag) + "," + format_double(r.acf) + "\n";
  return out;
}

inline std::string AcfTable::summary() const {
  std::map<std::size_t, std::pair<std::string, double>> best;
  for (const AcfRow& r : rows) {
    auto it = best.find(r.k);
    if (it == best.end() || std::abs(r.acf) < std::abs(it->second.second)) best[r.k] = {r.scan, r.acf};
  }
  std::ostringstream os;
  os << "test function: " << test_function << "\n";
  os << "lowest |ACF| per abscissa k:\n";
  std::map<std::string, int> wins;
  for (const auto& [k, v] : best) {
    os << "  k=" << k << ": " << v.first << " (" << format_double(v.second) << ")\n";
    ++wins[v.first];
  }
  for (const auto& [scan, n] : wins) os << scan << " lowest at " << n << " of " << best.size() << " abscissae\n";
  return os.str();
}

/// Lag used at abscissa k: lag_normalize for SS/HS/HSS/RS, k itself for DA
/// and its sandwich variant (both make two draws per iteration).
inline std::size_t comparison_lag(std::size_t k, const std::string& scan_label) {
  if (scan_label == "DA" || scan_label == "SANDWICH") return k;
  if (scan_label == "SS") return lag_normalize(k, ScanKind::SS);
  if (scan_label == "HS") return lag_normalize(k, ScanKind::HS);
  if (scan_label == "HSS") return lag_normalize(k, ScanKind::HSS);
  if (scan_label == "RS") return lag_normalize(k, ScanKind::RS);
  throw ConfigError("unknown scan label '" + scan_label + "'");
}

/// ACF of a test function at lag-normalized lags for k = 1..k_max across
/// chains on the same model. DA-family and Gibbs-family scans cannot be mixed.
inline AcfTable compare_table(const std::vector<Chain>& chains, const std::function<Vector(const Chain&)>& test_function,
                              std::size_t k_max, const std::string& label) {
  if (chains.empty()) throw PreconditionError("compare_table: no chains");
  if (k_max < 1) throw PreconditionError("compare_table: k_max must be >= 1");
  bool any_da = false, any_gibbs = false;
  for (const Chain& c : chains) {
    if (c.meta.model != chains.front().meta.model || c.param_names != chains.front().param_names)
      throw ConfigError("compare_table: chains come from different models");
    const bool da = c.meta.scan == "DA" || c.meta.scan == "SANDWICH";
    any_da = any_da || da;
    any_gibbs = any_gibbs || !da;
  }
  if (any_da && any_gibbs) throw ConfigError("compare_table: cannot mix DA-type and Gibbs-type scans");
  AcfTable table;
  table.test_function = label;
  std::vector<Vector> acfs;
  for (const Chain& c : chains) {
    table.scans.push_back(c.meta.scan);
    const Vector series = test_function(c);
    acfs.push_back(autocorrelation(series, comparison_lag(k_max, c.meta.scan)));
  }
  for (std::size_t k = 1; k <= k_max; ++k)
    for (std::size_t i = 0; i < chains.size(); ++i) {
      const std::size_t lag = comparison_lag(k, chains[i].meta.scan);
      table.rows.push_back({k, chains[i].meta.scan, lag, acfs[i](static_cast<Eigen::Index>(lag))});
    }
  return table;
}

/// Post-burn-in series of (y - W theta)^T (y - W theta) + lambda0 + lambda1 for a GLMM chain.
inline Vector glmm_test_function_series(const GlmmModel& model, const Chain& chain) {
  const Eigen::Index k = model.p() + model.q();
  if (chain.samples.cols() != k + model.m() + 1) throw PreconditionError("chain does not match the GLMM");
  const Eigen::Index b = std::min<Eigen::Index>(static_cast<Eigen::Index>(chain.meta.burn_in), chain.rows());
  Vector out(chain.rows() - b);
  for (Eigen::Index i = b; i < chain.rows(); ++i) {
    const Vector theta = chain.samples.row(i).head(k).transpose();
    const Vector lambda = chain.samples.row(i).segment(k, model.m() + 1).transpose();
    out(i - b) = model.test_function(theta, lambda);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// Asymptotic Kolmogorov tail P(K > x).
inline double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.3) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    s += (j % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

/// One-sample KS test against a continuous CDF.
inline KsResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw PreconditionError("ks_test: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

/// Two-sample KS test.
inline KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_test_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

}  // namespace hsg
