#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "stepsel/selector.hpp"

using namespace stepsel;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<ExpFamily> all_families() {
  return {ExpFamily::gaussian(0.8), ExpFamily::poisson(), ExpFamily::exponential(),
          ExpFamily::bernoulli()};
}

double draw_param(const ExpFamily& fam, Rng& rng) {
  switch (fam.kind()) {
    case FamilyKind::Gaussian: return 4.0 * rng.uniform() - 2.0;
    case FamilyKind::Poisson: return std::log(0.3 + 12.0 * rng.uniform());
    case FamilyKind::Exponential: return 0.1 + 4.0 * rng.uniform();
    case FamilyKind::Bernoulli: return 4.0 * rng.uniform() - 2.0;
  }
  return 0.0;
}

StepFn random_step(const ExpFamily& fam, std::size_t n, Rng& rng) {
  std::vector<std::size_t> cps;
  for (std::size_t t = 2; t <= n; ++t) {
    if (rng.uniform() < 0.1) cps.push_back(t);
  }
  std::vector<double> values(cps.size() + 1);
  for (double& v : values) v = draw_param(fam, rng);
  return StepFn(Partition(n, cps), values);
}

std::vector<double> draw_series(const ExpFamily& fam, const StepFn& truth, Rng& rng) {
  std::vector<double> y(truth.n());
  for (std::size_t i = 1; i <= truth.n(); ++i) y[i - 1] = sample(fam, truth.eval_at(i), rng);
  return y;
}

}  // namespace

TEST_CASE("psi reference values") {
  CHECK(psi(1.0) == 0.0);
  CHECK(psi(0.0) == -1.0);
  CHECK(psi(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(psi(3.0) == 0.5);
  CHECK_THROWS_AS(psi(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(psi(std::nan("")), std::invalid_argument);
  double prev = -1.0;
  for (double x = 0.01; x < 100.0; x *= 1.3) {
    REQUIRE(psi(x) > prev);
    prev = psi(x);
  }
}

TEST_CASE("T statistic reference value") {
  const std::vector<double> y{0.0, 3.0};
  const StepFn a(Partition(2), {std::log(1.0)});
  const StepFn b(Partition(2), {std::log(3.0)});
  // Independent evaluation of psi on the pmf ratios 3^y e^{-2}.
  const double expected = oracle::psi_sqrt_ratio(std::exp(-2.0)) +
                          oracle::psi_sqrt_ratio(27.0 * std::exp(-2.0));
  CHECK_THAT(expected, WithinAbs(-0.14903469102022344, 1e-15));
  CHECK_THAT(t_statistic(ExpFamily::poisson(), y, a, b), WithinAbs(expected, 1e-14));
  CHECK(t_statistic(ExpFamily::poisson(), y, a, a) == 0.0);
}

TEST_CASE("T statistic rejects length mismatches and out-of-domain values") {
  const std::vector<double> y{1.0, 2.0, 3.0};
  const StepFn a(Partition(3), {1.0});
  const StepFn short_fn(Partition(2), {1.0});
  CHECK_THROWS_AS(t_statistic(ExpFamily::gaussian(1.0), y, a, short_fn), std::invalid_argument);
  const StepFn bad(Partition(3), {-1.0});
  CHECK_THROWS_AS(t_statistic(ExpFamily::exponential(), y, a, bad), std::domain_error);
}

TEST_CASE("T statistic algebra on randomized triples") {
  Rng rng(4242);
  for (const auto& fam : all_families()) {
    for (int rep = 0; rep < 250; ++rep) {
      const std::size_t n = 1 + rng.uniform_int(40);
      const StepFn a = random_step(fam, n, rng);
      const StepFn b = random_step(fam, n, rng);
      const auto y = draw_series(fam, random_step(fam, n, rng), rng);
      const double tab = t_statistic(fam, y, a, b);
      REQUIRE(tab == -t_statistic(fam, y, b, a));
      REQUIRE(std::abs(tab) <= static_cast<double>(n));
      double literal = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        const double ratio = std::exp(log_density(fam, b.eval_at(i), y[i - 1]) -
                                      log_density(fam, a.eval_at(i), y[i - 1]));
        literal += oracle::psi_sqrt_ratio(ratio);
      }
      if (std::isfinite(literal)) REQUIRE_THAT(tab, WithinAbs(literal, 1e-12 * n));
    }
  }
}

TEST_CASE("penalty reference values") {
  CHECK(penalty(PenaltyConfig{0.0, 1.0}, 500, 3) == 0.0);
  const PenaltyConfig cfg;
  CHECK(cfg.kappa == 0.08);
  CHECK_THAT(penalty(cfg, 500, 1), WithinAbs(1.3059686478737753, 1e-13));
  CHECK_THAT(penalty(cfg, 500, 5), WithinAbs(7.6188935380152191, 1e-12));
  for (std::size_t k : {1u, 4u, 50u, 499u, 500u}) {
    REQUIRE_THAT(penalty(cfg, 500, k),
                 WithinAbs(cfg.kappa * (dn_complexity(500, k) + delta_weight(500, k)), 1e-10));
  }
  CHECK_THROWS_AS(penalty(cfg, 500, 0), std::invalid_argument);
  CHECK_THROWS_AS(penalty(cfg, 500, 501), std::invalid_argument);
  CHECK_THROWS_AS(PenaltyConfig({0.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(PenaltyConfig({0.1, 0.5}).validate(), std::invalid_argument);
  CHECK_THAT(PenaltyConfig::from_c0(0.032).kappa, WithinAbs(0.08, 1e-15));
}

TEST_CASE("single candidate has zero upsilon and is chosen") {
  const std::vector<double> y{1.0, 2.0, 0.0, 4.0};
  const std::vector<StepFn> cands{StepFn(Partition(4, {3}), {std::log(1.5), std::log(2.0)})};
  const auto res = select(ExpFamily::poisson(), y, cands, PenaltyConfig{});
  CHECK(res.chosen == 0);
  CHECK(res.upsilon.size() == 1);
  CHECK(res.upsilon[0] == 0.0);
  CHECK(res.ties == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(select(ExpFamily::poisson(), y, std::vector<StepFn>{}, PenaltyConfig{}),
                  std::invalid_argument);
}

TEST_CASE("upsilon matches a direct scalar expansion for two candidates") {
  Rng rng(5);
  const auto fam = ExpFamily::poisson();
  const StepFn a = random_step(fam, 30, rng);
  const StepFn b = random_step(fam, 30, rng);
  const auto y = draw_series(fam, a, rng);
  const PenaltyConfig cfg{0.3, 1.0};
  const std::vector<StepFn> cands{a, b};
  const auto res = upsilon_scores(fam, y, cands, cfg);
  const double tab = res.t_matrix(0, 1);
  const double pa = penalty(cfg, 30, a.segment_count());
  const double pb = penalty(cfg, 30, b.segment_count());
  const double ua = std::max(-pa, tab - pb) + pa;
  const double ub = std::max(-tab - pa, -pb) + pb;
  CHECK(res.upsilon[0] == ua);
  CHECK(res.upsilon[1] == ub);
  CHECK(res.t_matrix(0, 0) == 0.0);
  CHECK(res.t_matrix(1, 0) == -tab);
}

TEST_CASE("identical candidates with equal penalties get equal upsilon") {
  Rng rng(6);
  const auto fam = ExpFamily::gaussian(1.0);
  const StepFn a = random_step(fam, 25, rng);
  const StepFn c = random_step(fam, 25, rng);
  const auto y = draw_series(fam, a, rng);
  const std::vector<StepFn> cands{a, c, a};
  const auto res = upsilon_scores(fam, y, cands, PenaltyConfig{});
  CHECK(res.upsilon[0] == res.upsilon[2]);
}

TEST_CASE("duplicate of the winner keeps the earlier index") {
  Rng rng(77);
  for (const auto& fam : all_families()) {
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 60;
      const StepFn truth = random_step(fam, n, rng);
      const auto y = draw_series(fam, truth, rng);
      std::vector<StepFn> cands{truth};
      for (int j = 0; j < 5; ++j) cands.push_back(random_step(fam, n, rng));
      const auto base = select(fam, y, cands, PenaltyConfig{});
      const double best = base.upsilon[base.chosen];
      cands.push_back(cands[base.chosen]);
      const auto with_dup = select(fam, y, cands, PenaltyConfig{});
      REQUIRE(with_dup.chosen == base.chosen);
      REQUIRE(with_dup.upsilon.back() == with_dup.upsilon[base.chosen]);
      REQUIRE(std::find(with_dup.ties.begin(), with_dup.ties.end(), cands.size() - 1) !=
              with_dup.ties.end());
      // The duplicate cannot change any sup, so the winning value is unchanged.
      REQUIRE(with_dup.upsilon[base.chosen] == best);
    }
  }
}

TEST_CASE("permutation equivariance") {
  Rng rng(99);
  for (const auto& fam : all_families()) {
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 50;
      const StepFn truth = random_step(fam, n, rng);
      const auto y = draw_series(fam, truth, rng);
      std::vector<StepFn> cands{truth};
      for (int j = 0; j < 6; ++j) cands.push_back(random_step(fam, n, rng));
      std::vector<std::size_t> perm(cands.size());
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = perm.size() - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
      }
      std::vector<StepFn> permuted;
      for (std::size_t p : perm) permuted.push_back(cands[p]);
      const auto base = select(fam, y, cands, PenaltyConfig{});
      const auto moved = select(fam, y, permuted, PenaltyConfig{});
      for (std::size_t i = 0; i < perm.size(); ++i) {
        // T entries are the same sums, so the sup is over the same multiset
        // of values; only the max order could differ, which is exact.
        REQUIRE(moved.upsilon[i] == base.upsilon[perm[i]]);
      }
      if (base.ties.size() == 1) {
        REQUIRE(permuted[moved.chosen].same_function(cands[base.chosen]));
      }
    }
  }
}

TEST_CASE("adding a candidate updates old scores by one extra term of the sup") {
  Rng rng(123);
  const auto fam = ExpFamily::poisson();
  const PenaltyConfig cfg;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 40;
    const StepFn truth = random_step(fam, n, rng);
    const auto y = draw_series(fam, truth, rng);
    std::vector<StepFn> cands;
    for (int j = 0; j < 4; ++j) cands.push_back(random_step(fam, n, rng));
    const auto before = select(fam, y, cands, cfg);
    const StepFn extra = random_step(fam, n, rng);
    cands.push_back(extra);
    const auto after = select(fam, y, cands, cfg);
    const double new_pen = penalty(cfg, n, extra.segment_count());
    const std::size_t last = cands.size() - 1;
    for (std::size_t i = 0; i < last; ++i) {
      const double own = penalty(cfg, n, cands[i].segment_count());
      const double extra_term = t_statistic(fam, y, cands[i], extra) - new_pen + own;
      REQUIRE_THAT(after.upsilon[i],
                   WithinAbs(std::max(before.upsilon[i], extra_term), 1e-12 * n));
      REQUIRE(after.upsilon[i] >= before.upsilon[i]);
    }
    for (double u : after.upsilon) REQUIRE(u >= 0.0);
    REQUIRE(after.upsilon[after.chosen] ==
            *std::min_element(after.upsilon.begin(), after.upsilon.end()));
  }
}

TEST_CASE("select_from_matrix ties and tolerance") {
  TMatrix t(3);
  const auto res = select_from_matrix(t, {1.0, 1.0, 2.0});
  CHECK(res.chosen == 0);
  CHECK(res.ties == std::vector<std::size_t>{0, 1});
  TMatrix t2(2);
  t2(0, 1) = 0.5e-9;
  t2(1, 0) = -0.5e-9;
  const auto near = select_from_matrix(t2, {1.0, 1.0});
  CHECK(near.chosen == 0);
  CHECK(near.ties.size() == 2);
  CHECK_THROWS_AS(select_from_matrix(TMatrix(2), {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(select_from_matrix(TMatrix(0), {}), std::invalid_argument);
}
