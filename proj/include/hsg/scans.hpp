#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hsg/distributions.hpp"
#include "hsg/errors.hpp"
#include "hsg/linalg.hpp"
#include "hsg/models/glmm.hpp"
#include "hsg/models/smn.hpp"
#include "hsg/models/student_t.hpp"
#include "hsg/models/toy_laplace.hpp"
#include "hsg/rng.hpp"
#include "hsg/sandwich.hpp"

namespace hsg {

enum class ScanKind { DA, SS, RS, HS, HSS };

inline std::string to_string(ScanKind k) {
  switch (k) {
    case ScanKind::DA: return "DA";
    case ScanKind::SS: return "SS";
    case ScanKind::RS: return "RS";
    case ScanKind::HS: return "HS";
    case ScanKind::HSS: return "HSS";
  }
  return "?";
}

/// Which blocks a scan updates per iteration. Block "X" is the scale block
/// (sigma2 for the t and SMN models, lambda for the GLMM) and block "Y" the
/// location block (mu, beta, theta). RS picks the latent block with
/// probability r1, X with r2 and Y with r3.
struct ScanSpec {
  ScanKind kind = ScanKind::HS;
  double r = 0.5;
  double r1 = 1.0 / 3.0;
  double r2 = 1.0 / 3.0;
  double r3 = 1.0 / 3.0;
  bool use_r1 = true;
  bool use_r2 = true;
  bool da_move = false;
  SChoice s_choice = SChoice::ModeMatch;

  static ScanSpec da(bool with_move = false) {
    ScanSpec s;
    s.kind = ScanKind::DA;
    s.da_move = with_move;
    return s;
  }
  static ScanSpec ss() {
    ScanSpec s;
    s.kind = ScanKind::SS;
    return s;
  }
  static ScanSpec rs(double r1 = 1.0 / 3.0, double r2 = 1.0 / 3.0, double r3 = 1.0 / 3.0) {
    ScanSpec s;
    s.kind = ScanKind::RS;
    s.r1 = r1;
    s.r2 = r2;
    s.r3 = r3;
    return s;
  }
  static ScanSpec hs(double r = 0.5) {
    ScanSpec s;
    s.kind = ScanKind::HS;
    s.r = r;
    return s;
  }
  static ScanSpec hss(double r = 0.5, bool use_r1 = true, bool use_r2 = true) {
    ScanSpec s;
    s.kind = ScanKind::HSS;
    s.r = r;
    s.use_r1 = use_r1;
    s.use_r2 = use_r2;
    return s;
  }

  void validate() const {
    auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if ((kind == ScanKind::HS || kind == ScanKind::HSS) && !open_unit(r))
      throw ConfigError("selection probability r must lie strictly inside (0, 1), got " + std::to_string(r));
    if (kind == ScanKind::RS) {
      if (!open_unit(r1) || !open_unit(r2) || !open_unit(r3))
        throw ConfigError("RS selection probabilities must each lie strictly inside (0, 1)");
      if (std::abs(r1 + r2 + r3 - 1.0) > 1e-12) throw ConfigError("RS selection probabilities must sum to 1");
    }
    if (da_move && kind != ScanKind::DA) throw ConfigError("the DA group move only applies to DA scans");
  }

  /// Conditional draws per iteration: SS 3, HS/HSS 2, RS 1, DA 2.
  int updates_per_iteration() const {
    switch (kind) {
      case ScanKind::SS: return 3;
      case ScanKind::RS: return 1;
      default: return 2;
    }
  }

  /// Short name used in tables and files.
  std::string label() const {
    if (kind == ScanKind::DA && da_move) return "SANDWICH";
    return to_string(kind);
  }

  /// Label with parameters, e.g. "HSS(r=0.5,R1=1,R2=0)".
  std::string describe() const {
    auto num = [](double v) {
      std::string s = std::to_string(v);
      s.erase(s.find_last_not_of('0') + 1);
      if (!s.empty() && s.back() == '.') s.pop_back();
      return s;
    };
    switch (kind) {
      case ScanKind::HS: return "HS(r=" + num(r) + ")";
      case ScanKind::HSS:
        return "HSS(r=" + num(r) + ",R1=" + (use_r1 ? "1" : "0") + ",R2=" + (use_r2 ? "1" : "0") + ")";
      case ScanKind::RS: return "RS(" + num(r1) + "," + num(r2) + "," + num(r3) + ")";
      default: return label();
    }
  }
};

/// Counters accumulated by a sampler. `conditional_draws` counts full
/// conditional block updates only; group moves and rejection candidates are
/// tracked separately.
struct StepCounters {
  std::uint64_t conditional_draws = 0;
  std::uint64_t latent_updates = 0;
  std::uint64_t x_updates = 0;
  std::uint64_t y_updates = 0;
  std::uint64_t group_moves = 0;
  std::uint64_t group_move_trials = 0;  // F-candidates drawn by the GLMM move
  std::uint64_t rejection_trials = 0;   // candidates drawn by latent rejection samplers
  std::uint64_t psi_clamps = 0;

  double group_move_acceptance() const {
    return group_move_trials ? static_cast<double>(group_moves) / static_cast<double>(group_move_trials) : NAN;
  }
};

// ---------------------------------------------------------------------------
// Per-model kernels

template <class Model>
struct Kernel;

template <>
struct Kernel<StudentTModel> {
  using State = StudentTState;
  using Latent = Vector;
  static constexpr bool kBlocks = true;
  static constexpr bool kDa = true;
  static constexpr const char* kModelId = "student_t";

  const StudentTModel& model;
  ScanSpec scan;

  static void check_scan(const StudentTModel& m, const ScanSpec& scan) {
    if (scan.kind == ScanKind::DA && !m.flat_prior())
      throw ConfigError("DA for the Student's t model needs the flat prior (joint draw of mu, sigma2 | z)");
    if (scan.kind == ScanKind::DA && scan.da_move)
      throw ConfigError("no DA group move is defined for the Student's t model");
    if (scan.kind == ScanKind::HSS && scan.use_r2 && !m.flat_prior())
      throw ConfigError("the R2 group move integrates mu out and needs the flat prior");
  }

  Latent draw_latent(const State& s, RngStream& rng, StepCounters&) const {
    Vector z(model.m());
    for (Eigen::Index i = 0; i < model.m(); ++i) z(i) = model.latent_law(i, s).sample(rng);
    return z;
  }
  void update_x(State& s, const Latent& z, RngStream& rng, StepCounters&) const {
    s.sigma2 = model.sigma2_law(s.mu, z).sample(rng);
  }
  void update_y(State& s, const Latent& z, RngStream& rng, StepCounters&) const {
    s.mu = model.mu_law(s.sigma2, z).sample(rng);
  }
  void move_x(Latent& z, const State&, RngStream& rng, StepCounters& c) const {
    const TLatentStats st = TLatentStats::from(z, model.w());
    z *= t_group_move_mu(st, model.nu(), model.m(), rng);
    ++c.group_moves;
  }
  void move_y(Latent& z, const State& s, RngStream& rng, StepCounters& c) const {
    const TLatentStats st = TLatentStats::from(z, model.w());
    z *= t_group_move_sigma(st, s.sigma2, model.nu(), model.m(), rng);
    ++c.group_moves;
  }
  void da_step(State& s, RngStream& rng, StepCounters& c) const {
    const Vector z = draw_latent(s, rng, c);
    s.sigma2 = model.sigma2_marginal_law(z).sample(rng);
    s.mu = model.mu_law(s.sigma2, z).sample(rng);
  }

  Eigen::Index width() const { return 2; }
  void write(const State& s, double* row) const {
    row[0] = s.mu;
    row[1] = s.sigma2;
  }
  State read(const double* row) const { return {row[0], row[1]}; }
};

template <>
struct Kernel<GlmmModel> {
  using State = GlmmState;
  using Latent = Vector;
  static constexpr bool kBlocks = true;
  static constexpr bool kDa = false;
  static constexpr const char* kModelId = "glmm";

  const GlmmModel& model;
  ScanSpec scan;

  static void check_scan(const GlmmModel&, const ScanSpec& scan) {
    if (scan.kind == ScanKind::DA) throw ConfigError("DA is not available for the GLMM (three blocks)");
    if (scan.kind == ScanKind::HSS && scan.use_r2)
      throw ConfigError("the GLMM has no group move on the theta branch; set use_R2 = false");
  }

  Latent draw_latent(const State& s, RngStream& rng, StepCounters& c) const {
    Vector tau(model.p());
    for (Eigen::Index j = 0; j < model.p(); ++j) {
      bool clamped = false;
      tau(j) = model.tau_law(j, s, &clamped).sample(rng);
      c.psi_clamps += clamped ? 1 : 0;
    }
    return tau;
  }
  void update_x(State& s, const Latent& tau, RngStream& rng, StepCounters&) const {
    const std::vector<GammaLaw> laws = model.lambda_laws(s.theta, tau);
    for (std::size_t i = 0; i < laws.size(); ++i) s.lambda(static_cast<Eigen::Index>(i)) = laws[i].sample(rng);
  }
  void update_y(State& s, const Latent& tau, RngStream& rng, StepCounters&) const {
    s.theta = model.theta_law(s.lambda, tau).sample(rng);
  }
  void move_x(Latent& tau, const State& s, RngStream& rng, StepCounters& c) const {
    const GlmmSandwichParams params = glmm_sandwich_params(model, s.theta, tau, scan.s_choice);
    tau *= glmm_group_move(params, rng, &c.group_move_trials);
    ++c.group_moves;
  }
  void move_y(Latent&, const State&, RngStream&, StepCounters&) const {
    throw ConfigError("the GLMM has no group move on the theta branch");
  }
  void da_step(State&, RngStream&, StepCounters&) const { throw ConfigError("DA is not available for the GLMM"); }

  Eigen::Index width() const { return model.p() + model.q() + model.m() + 1; }
  void write(const State& s, double* row) const {
    const Eigen::Index k = model.p() + model.q();
    for (Eigen::Index i = 0; i < k; ++i) row[i] = s.theta(i);
    for (Eigen::Index i = 0; i <= model.m(); ++i) row[k + i] = s.lambda(i);
  }
  State read(const double* row) const {
    const Eigen::Index k = model.p() + model.q();
    State s;
    s.theta = Eigen::Map<const Vector>(row, k);
    s.lambda = Eigen::Map<const Vector>(row + k, model.m() + 1);
    return s;
  }
};

template <>
struct Kernel<SmnModel> {
  using State = SmnState;
  using Latent = Vector;
  static constexpr bool kBlocks = true;
  static constexpr bool kDa = false;
  static constexpr const char* kModelId = "smn";

  const SmnModel& model;
  ScanSpec scan;

  static void check_scan(const SmnModel&, const ScanSpec& scan) {
    if (scan.kind == ScanKind::DA) throw ConfigError("DA is not available for the SMN regression (three blocks)");
    if (scan.kind == ScanKind::HSS && (scan.use_r1 || scan.use_r2))
      throw ConfigError("no group moves are defined for the SMN regression; HSS needs use_R1 = use_R2 = false");
  }

  Latent draw_latent(const State& s, RngStream& rng, StepCounters&) const {
    const Vector r = model.residuals(s.beta);
    Vector z(model.m());
    for (Eigen::Index i = 0; i < model.m(); ++i) z(i) = sample_latent(model.latent_law(r(i), s.sigma2), rng);
    return z;
  }
  void update_x(State& s, const Latent& z, RngStream& rng, StepCounters&) const {
    s.sigma2 = model.sigma2_law(s.beta, z).sample(rng);
  }
  void update_y(State& s, const Latent& z, RngStream& rng, StepCounters&) const {
    s.beta = model.beta_law(s.sigma2, z).sample(rng);
  }
  void move_x(Latent&, const State&, RngStream&, StepCounters&) const {
    throw ConfigError("no group moves are defined for the SMN regression");
  }
  void move_y(Latent&, const State&, RngStream&, StepCounters&) const {
    throw ConfigError("no group moves are defined for the SMN regression");
  }
  void da_step(State&, RngStream&, StepCounters&) const {
    throw ConfigError("DA is not available for the SMN regression");
  }

  Eigen::Index width() const { return model.p() + 1; }
  void write(const State& s, double* row) const {
    for (Eigen::Index i = 0; i < model.p(); ++i) row[i] = s.beta(i);
    row[model.p()] = s.sigma2;
  }
  State read(const double* row) const { return {Eigen::Map<const Vector>(row, model.p()), row[model.p()]}; }
};

template <>
struct Kernel<ToyLaplaceModel> {
  using State = ToyLaplaceState;
  using Latent = double;
  static constexpr bool kBlocks = false;
  static constexpr bool kDa = true;
  static constexpr const char* kModelId = "toy_laplace";

  const ToyLaplaceModel& model;
  ScanSpec scan;

  static void check_scan(const ToyLaplaceModel&, const ScanSpec& scan) {
    if (scan.kind != ScanKind::DA) throw ConfigError("the toy Laplace model has two blocks; only DA scans apply");
  }

  void da_step(State& s, RngStream& rng, StepCounters& c) const {
    double z = model.z_law(s.u).sample(rng, kDefaultRejectionCap, &c.rejection_trials);
    if (scan.da_move) {
      z = toy_laplace_sandwich_move(z, rng);
      ++c.group_moves;
    }
    s.u = model.u_law(z).sample(rng);
  }

  Eigen::Index width() const { return 1; }
  void write(const State& s, double* row) const { row[0] = s.u; }
  State read(const double* row) const { return {row[0]}; }
};

// ---------------------------------------------------------------------------
// Sampler

/// One Markov chain transition per `step`. The RS scan keeps the most recent
/// latent draw between steps; other scans regenerate it every iteration.
template <class Model>
class Sampler {
 public:
  using K = Kernel<Model>;
  using State = typename K::State;

  Sampler(const Model& model, const ScanSpec& scan) : kernel_{model, scan}, scan_(scan) {
    scan_.validate();
    K::check_scan(model, scan_);
  }

  void step(State& s, RngStream& rng) {
    if constexpr (K::kDa) {
      if (scan_.kind == ScanKind::DA) {
        kernel_.da_step(s, rng, counters_);
        counters_.conditional_draws += 2;
        counters_.latent_updates += 1;
        counters_.y_updates += 1;
        return;
      }
    }
    if constexpr (K::kBlocks) {
      switch (scan_.kind) {
        case ScanKind::SS: {
          const auto z = latent(s, rng);
          x_update(s, z, rng);
          y_update(s, z, rng);
          break;
        }
        case ScanKind::HS:
        case ScanKind::HSS: {
          auto z = latent(s, rng);
          const bool hss = scan_.kind == ScanKind::HSS;
          if (rng.uniform() <= scan_.r) {
            if (hss && scan_.use_r1) kernel_.move_x(z, s, rng, counters_);
            x_update(s, z, rng);
          } else {
            if (hss && scan_.use_r2) kernel_.move_y(z, s, rng, counters_);
            y_update(s, z, rng);
          }
          break;
        }
        case ScanKind::RS: {
          if (!rs_latent_) rs_latent_ = kernel_.draw_latent(s, rng, counters_);
          const double u = rng.uniform();
          if (u < scan_.r1) {
            rs_latent_ = latent(s, rng);
          } else if (u < scan_.r1 + scan_.r2) {
            x_update(s, *rs_latent_, rng);
          } else {
            y_update(s, *rs_latent_, rng);
          }
          break;
        }
        default: throw ConfigError("scan not available for this model");
      }
    }
  }

  const StepCounters& counters() const { return counters_; }
  const ScanSpec& scan() const { return scan_; }
  const K& kernel() const { return kernel_; }

 private:
  using Latent = typename K::Latent;

  Latent latent(const State& s, RngStream& rng) {
    ++counters_.conditional_draws;
    ++counters_.latent_updates;
    return kernel_.draw_latent(s, rng, counters_);
  }
  void x_update(State& s, const Latent& z, RngStream& rng) {
    ++counters_.conditional_draws;
    ++counters_.x_updates;
    kernel_.update_x(s, z, rng, counters_);
  }
  void y_update(State& s, const Latent& z, RngStream& rng) {
    ++counters_.conditional_draws;
    ++counters_.y_updates;
    kernel_.update_y(s, z, rng, counters_);
  }

  K kernel_;
  ScanSpec scan_;
  StepCounters counters_;
  std::optional<Latent> rs_latent_;
};

/// A single transition from `state`. RS needs the latent carried between
/// steps and is only available through Sampler.
template <class Model>
typename Kernel<Model>::State step(const Model& model, const typename Kernel<Model>::State& state,
                                   const ScanSpec& scan, RngStream& rng) {
  if (scan.kind == ScanKind::RS)
    throw UnsupportedError("a random-scan step depends on the retained latent; use Sampler for RS chains");
  Sampler<Model> sampler(model, scan);
  typename Kernel<Model>::State next = state;
  sampler.step(next, rng);
  return next;
}

// ---------------------------------------------------------------------------
// Chains

using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ChainMeta {
  std::uint64_t seed = 0;
  std::uint64_t chain_index = 0;
  std::string scan;        // ScanSpec::label()
  std::string scan_detail; // ScanSpec::describe()
  std::string model;
  int updates_per_iteration = 0;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  StepCounters counters;
  bool aborted = false;
  std::string abort_reason;
  double wall_seconds = 0.0;
};

struct Chain {
  SampleMatrix samples;
  std::vector<std::string> param_names;
  ChainMeta meta;

  Eigen::Index rows() const { return samples.rows(); }

  Eigen::Index column_index(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i)
      if (param_names[i] == name) return static_cast<Eigen::Index>(i);
    throw PreconditionError("chain has no parameter named '" + name + "'");
  }
  Vector column(Eigen::Index j) const { return samples.col(j); }
  Vector column(const std::string& name) const { return column(column_index(name)); }

  /// Column j with the burn-in rows removed.
  Vector kept(Eigen::Index j) const {
    const Eigen::Index b = std::min<Eigen::Index>(static_cast<Eigen::Index>(meta.burn_in), samples.rows());
    return samples.col(j).tail(samples.rows() - b);
  }
  Vector kept(const std::string& name) const { return kept(column_index(name)); }
};

/// A step failure inside run_chain, tagged with the iteration at which it happened.
class StepError : public NumericalError {
 public:
  StepError(std::size_t iteration, const std::string& what)
      : NumericalError("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

struct RunOptions {
  /// Burn-in as a fraction of the iteration count (default: first half).
  double burn_in_fraction = 0.5;
  /// Return the completed prefix with meta.aborted set instead of throwing.
  bool keep_partial = false;
  std::uint64_t chain_index = 0;
};

/// Streams used by chain `index`: the transition stream and the stream for
/// drawing a default initial state.
inline RngStream chain_stream(std::uint64_t seed, std::uint64_t index) { return RngStream(seed, 2 * index); }
inline RngStream init_stream(std::uint64_t seed, std::uint64_t index) { return RngStream(seed, 2 * index + 1); }

template <class Model>
std::vector<std::string> chain_param_names(const Model& model) {
  return model.param_names();
}

template <class Model>
Chain run_chain(const Model& model, const ScanSpec& scan, std::size_t n_iterations,
                const typename Kernel<Model>::State& init, std::uint64_t seed, const RunOptions& opt = {}) {
  if (n_iterations < 1) throw PreconditionError("run_chain: n_iterations must be >= 1");
  if (!(opt.burn_in_fraction >= 0.0 && opt.burn_in_fraction < 1.0))
    throw ConfigError("burn-in fraction must lie in [0, 1)");
  Sampler<Model> sampler(model, scan);
  const auto& kernel = sampler.kernel();

  Chain chain;
  chain.param_names = chain_param_names(model);
  chain.samples.resize(static_cast<Eigen::Index>(n_iterations), kernel.width());
  chain.meta.seed = seed;
  chain.meta.chain_index = opt.chain_index;
  chain.meta.scan = scan.label();
  chain.meta.scan_detail = scan.describe();
  chain.meta.model = Kernel<Model>::kModelId;
  chain.meta.updates_per_iteration = scan.updates_per_iteration();
  chain.meta.burn_in = static_cast<std::size_t>(std::floor(opt.burn_in_fraction * static_cast<double>(n_iterations)));

  RngStream rng = chain_stream(seed, opt.chain_index);
  typename Kernel<Model>::State state = init;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t done = 0;
  try {
    for (; done < n_iterations; ++done) {
      sampler.step(state, rng);
      kernel.write(state, chain.samples.row(static_cast<Eigen::Index>(done)).data());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    if (!opt.keep_partial) throw StepError(done, e.what());
    chain.samples.conservativeResize(static_cast<Eigen::Index>(done), kernel.width());
    chain.meta.aborted = true;
    chain.meta.abort_reason = "iteration " + std::to_string(done) + ": " + e.what();
  }
  chain.meta.iterations = done;
  chain.meta.counters = sampler.counters();
  chain.meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return chain;
}

/// Chain started from the model's default initial state, drawn from a stream
/// separate from the transition stream.
template <class Model>
Chain run_chain(const Model& model, const ScanSpec& scan, std::size_t n_iterations, std::uint64_t seed,
                const RunOptions& opt = {}) {
  RngStream init_rng = init_stream(seed, opt.chain_index);
  return run_chain(model, scan, n_iterations, model.initial_state(init_rng), seed, opt);
}

/// `n_chains` independent chains on worker threads; chain i uses the streams
/// derived from (seed, i).
template <class Model>
std::vector<Chain> run_chains(const Model& model, const ScanSpec& scan, std::size_t n_iterations,
                              std::uint64_t seed, std::size_t n_chains, RunOptions opt = {},
                              const std::optional<typename Kernel<Model>::State>& init = std::nullopt) {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  std::vector<Chain> chains(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < n_chains; ++i) {
    workers.emplace_back([&, i] {
      try {
        RunOptions o = opt;
        o.chain_index = i;
        chains[i] = init ? run_chain(model, scan, n_iterations, *init, seed, o)
                         : run_chain(model, scan, n_iterations, seed, o);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return chains;
}

/// Lag compared across scans at abscissa k so that every scan has made the
/// same number of conditional draws: SS 2k, HS/HSS 3k, RS 6k.
inline std::size_t lag_normalize(std::size_t k, ScanKind kind) {
  if (k < 1) throw PreconditionError("lag_normalize: k must be >= 1");
  switch (kind) {
    case ScanKind::SS: return 2 * k;
    case ScanKind::HS:
    case ScanKind::HSS: return 3 * k;
    case ScanKind::RS: return 6 * k;
    case ScanKind::DA: break;
  }
  throw UnsupportedError("lag_normalize: DA is not part of the lag-normalized comparison");
}

}  // namespace hsg
