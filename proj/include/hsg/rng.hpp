#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hsg {

/// Seeded pseudo-random stream.
///
/// A stream is identified by (seed, stream_id). The engine is a 64-bit
/// Mersenne twister whose full state is expanded from all four 32-bit words of
/// the pair through std::seed_seq, so different stream ids give unrelated
/// states. All variate generation in the library goes through the primitives
/// below (never through std::*_distribution, whose output is
/// implementation-defined), which makes draw sequences bit-identical across
/// standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x68736731u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// A new stream sharing the seed with a different id.
  RngStream substream(std::uint64_t stream_id) const { return RngStream(seed_, stream_id); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method (spare value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Standard exponential.
  double exponential() { return -std::log(uniform()); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hsg
