#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace stepsel {

/// Reproducible random stream.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq; both are fully
/// specified by the C++ standard, so a stream is bit-identical on every
/// conforming platform. The variate generators below are implemented here
/// rather than taken from <random> because the standard distributions are
/// implementation-defined:
///
///   uniform()      53-bit mantissa, open interval (0, 1)
///   uniform_int()  rejection sampling on the top bits
///   normal()       Box-Muller, cosine branch only (no cached state)
///   exponential()  inversion
///   poisson()      sequential inversion for mean < 10, PTRS (Hormann 1993)
///                  otherwise
///
/// Independent streams are derived from (base seed, id...) so that
/// replications and generators never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Stream keyed by a base seed and any number of integer identifiers.
  static Rng stream(std::uint64_t base_seed,
                    std::initializer_list<std::uint64_t> ids);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_int(std::uint64_t bound);
  double normal();
  double exponential(double rate);
  std::int64_t poisson(double mean);

 private:
  explicit Rng(std::seed_seq& seq) : engine_(seq) {}

  std::mt19937_64 engine_;
};

}  // namespace stepsel
