#include "stepsel/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace stepsel {

namespace {

std::vector<std::uint32_t> split_words(std::uint64_t v) {
  return {static_cast<std::uint32_t>(v & 0xffffffffu),
          static_cast<std::uint32_t>(v >> 32)};
}

// Hormann, "The transformed rejection method for generating Poisson random
// variables" (PTRS). Valid for mean >= 10.
std::int64_t poisson_ptrs(Rng& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::int64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double lhs = std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + k * loglam - std::lgamma(k + 1.0);
    if (lhs <= rhs) {
      return static_cast<std::int64_t>(k);
    }
  }
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_() {
  auto words = split_words(seed);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

Rng Rng::stream(std::uint64_t base_seed,
                std::initializer_list<std::uint64_t> ids) {
  std::vector<std::uint32_t> words = split_words(base_seed);
  // Length tag keeps (s, {}) and (s, {0}) apart.
  words.push_back(static_cast<std::uint32_t>(ids.size()));
  for (std::uint64_t id : ids) {
    auto w = split_words(id);
    words.insert(words.end(), w.begin(), w.end());
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

double Rng::uniform() {
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) {
      return u;
    }
  }
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("uniform_int: bound must be positive");
  }
  // Largest multiple of bound representable; reject the tail.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
  for (;;) {
    const std::uint64_t x = engine_();
    if (x < limit) {
      return x % bound;
    }
  }
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double rate) {
  return -std::log(uniform()) / rate;
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::domain_error("poisson: mean must be finite and nonnegative");
  }
  if (mean == 0.0) {
    return 0;
  }
  if (mean >= 10.0) {
    return poisson_ptrs(*this, mean);
  }
  // Sequential search on the CDF.
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && cdf < u) {
      // Rounding left the CDF short of u; u is in the far tail.
      break;
    }
  }
  return k;
}

}  // namespace stepsel
