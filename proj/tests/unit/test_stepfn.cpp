#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "stepsel/stepfn.hpp"

using namespace stepsel;
using Catch::Matchers::WithinAbs;

namespace {

Partition random_partition(std::size_t n, Rng& rng) {
  std::vector<std::size_t> cps;
  for (std::size_t t = 2; t <= n; ++t) {
    if (rng.uniform() < 0.2) cps.push_back(t);
  }
  return Partition(n, cps);
}

}  // namespace

TEST_CASE("partition validation") {
  CHECK_THROWS_AS(Partition(0), std::invalid_argument);
  CHECK_THROWS_AS(Partition(10, {1}), std::invalid_argument);
  CHECK_THROWS_AS(Partition(10, {11}), std::invalid_argument);
  CHECK_THROWS_AS(Partition(10, {6, 4}), std::invalid_argument);
  CHECK_THROWS_AS(Partition(10, {4, 4}), std::invalid_argument);
  const Partition p(10, {4, 6});
  CHECK(p.segment_count() == 3);
  CHECK(p.segment_begin(0) == 1);
  CHECK(p.segment_end(0) == 3);
  CHECK(p.segment_begin(1) == 4);
  CHECK(p.segment_end(2) == 10);
  CHECK(p.segment_length(1) == 2);
  CHECK_THROWS_AS(p.segment_begin(3), std::out_of_range);
}

TEST_CASE("eval_at follows the segment-start convention") {
  const StepFn c(Partition(7), {2.5});
  for (std::size_t i = 1; i <= 7; ++i) CHECK(c.eval_at(i) == 2.5);

  const StepFn f(Partition(10, {6}), {1.0, 2.0});
  CHECK(f.eval_at(5) == 1.0);
  CHECK(f.eval_at(6) == 2.0);
  CHECK_THROWS_AS(f.eval_at(0), std::out_of_range);
  CHECK_THROWS_AS(f.eval_at(11), std::out_of_range);
  CHECK_THROWS_AS(StepFn(Partition(10, {6}), {1.0}), std::invalid_argument);
}

TEST_CASE("dense evaluation matches eval_at") {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const Partition p = random_partition(1 + rng.uniform_int(60), rng);
    std::vector<double> values(p.segment_count());
    for (double& v : values) v = rng.normal();
    const StepFn f(p, values);
    const auto d = f.dense();
    REQUIRE(d.size() == p.n());
    for (std::size_t i = 1; i <= p.n(); ++i) REQUIRE(d[i - 1] == f.eval_at(i));
  }
}

TEST_CASE("validate and same_function") {
  const StepFn f(Partition(4, {3}), {0.5, -0.5}, "a");
  CHECK_NOTHROW(f.validate(ExpFamily::gaussian(1.0)));
  CHECK_THROWS_AS(f.validate(ExpFamily::exponential()), std::domain_error);
  const StepFn g(Partition(4, {3}), {0.5, -0.5}, "b");
  CHECK(f.same_function(g));
  CHECK_FALSE(f.same_function(StepFn(Partition(4, {2}), {0.5, -0.5})));
  CHECK_FALSE(f.same_function(StepFn(Partition(4, {3}), {0.5, -0.25})));
}

TEST_CASE("refine examples") {
  const Partition m(10, {6});
  CHECK(refine(m, m) == m);
  const Partition r = refine(Partition(10, {6}), Partition(10, {4}));
  CHECK(r.changepoints() == std::vector<std::size_t>{4, 6});
  CHECK(r.segment_count() == 3);
  CHECK(refine(Partition(10), m) == m);
  CHECK_THROWS_AS(refine(Partition(10), Partition(11)), std::invalid_argument);
}

TEST_CASE("refine is commutative, associative, idempotent and size-bounded") {
  Rng rng(33);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + rng.uniform_int(40);
    const Partition a = random_partition(n, rng);
    const Partition b = random_partition(n, rng);
    const Partition c = random_partition(n, rng);
    REQUIRE(refine(a, b) == refine(b, a));
    REQUIRE(refine(refine(a, b), c) == refine(a, refine(b, c)));
    REQUIRE(refine(a, a) == a);
    REQUIRE(refine(a, b).segment_count() <= a.segment_count() + b.segment_count() - 1);
  }
}

TEST_CASE("delta_weight and dn_complexity reference values") {
  CHECK(delta_weight(10, 1) == 1.0);
  CHECK_THAT(delta_weight(10, 3), WithinAbs(6.583518938456110, 1e-13));
  CHECK_THAT(delta_weight(500, 5), WithinAbs(26.660318295249782, 1e-10));
  CHECK_THAT(dn_complexity(7, 7), WithinAbs(9.11 * 7, 1e-12));
  CHECK_THAT(dn_complexity(500, 1), WithinAbs(15.324608098422191, 1e-12));
  CHECK_THAT(dn_complexity(500, 5), WithinAbs(68.575850929940457, 1e-12));
  CHECK_THROWS_AS(delta_weight(10, 0), std::invalid_argument);
  CHECK_THROWS_AS(delta_weight(10, 11), std::invalid_argument);
  CHECK_THROWS_AS(dn_complexity(10, 0), std::invalid_argument);
}

TEST_CASE("log_binomial agrees with an independent log sum") {
  for (std::size_t n : {0u, 1u, 5u, 30u, 60u, 61u, 200u, 100000u}) {
    for (std::size_t k : {0u, 1u, 2u, 7u, 30u}) {
      if (k > n) continue;
      REQUIRE_THAT(log_binomial(n, k),
                   WithinAbs(oracle::log_choose(n, k), 1e-9 * (1.0 + oracle::log_choose(n, k))));
    }
  }
  CHECK(log_binomial(1000000, 0) == 0.0);
  CHECK(std::isfinite(log_binomial(1000000, 500000)));
  CHECK_THROWS_AS(log_binomial(3, 4), std::invalid_argument);
}

TEST_CASE("weight sum over all partitions matches the closed geometric sum") {
  const double bound = 1.0 / (std::exp(1.0) - 1.0);
  for (std::size_t n : {1u, 2u, 5u, 10u, 15u}) {
    double enumerated = 0.0;
    for (const auto& cps : oracle::all_partitions(n)) {
      enumerated += std::exp(-delta_weight(n, cps.size() + 1));
    }
    double closed = 0.0;
    for (std::size_t k = 1; k <= n; ++k) closed += std::exp(-static_cast<double>(k));
    REQUIRE_THAT(enumerated, WithinAbs(closed, 1e-12));
    REQUIRE(enumerated < bound);
  }
}

TEST_CASE("complexity is nondecreasing in k; weight increments follow the binomial ratio") {
  for (std::size_t n : {1u, 2u, 17u, 500u, 10000u}) {
    for (std::size_t k = 2; k <= n; ++k) {
      REQUIRE(dn_complexity(n, k) >= dn_complexity(n, k - 1));
      // Delta(k) - Delta(k-1) = log((n - k + 1) / (k - 1)) + 1: positive while
      // k - 1 < n e / (e + 1), negative near k = n.
      const double step = delta_weight(n, k) - delta_weight(n, k - 1);
      const double expected =
          std::log(static_cast<double>(n - k + 1) / static_cast<double>(k - 1)) + 1.0;
      REQUIRE_THAT(step, WithinAbs(expected, 1e-9 * (1.0 + delta_weight(n, k))));
      if (static_cast<double>(k - 1) < static_cast<double>(n) * std::exp(1.0) / (std::exp(1.0) + 1.0)) {
        REQUIRE(step > 0.0);
      }
    }
  }
}
