#include "doctest.h"

#include <cmath>

#include "llp/losses.hpp"
#include "llp/theory.hpp"

using namespace llp;
using namespace llp::theory;

TEST_CASE("pinsker audit finds no violations") {
  for (std::size_t c : {2u, 3u, 5u}) {
    const auto r = pinsker_audit(20000, c, RngSeed{c});
    CHECK(r.trials == 20000);
    CHECK(r.violations == 0);
    CHECK(r.min_slack >= -1e-12);
  }
}

TEST_CASE("pinsker fixtures") {
  const auto same = make_simplex({0.4, 0.6});
  CHECK(kl_proportion_loss(same, same) == 0.0);
  CHECK(tv_star_loss(same, same, 1.0) == 0.0);
  const auto p = make_simplex({1.0, 0.0});
  const auto q = make_simplex({0.5, 0.5});
  const double slack = kl_proportion_loss(p, q) - 2.0 * std::pow(tv_distance(p, q), 2);
  CHECK(slack == doctest::Approx(0.69314718055994530942 - 0.5).epsilon(1e-12));
}

TEST_CASE("theorem_rhs") {
  CHECK(kappa(2.0) == 1.0);
  CHECK(kappa(1.0) == 2.0);
  // Frozen with tests/oracles/derive_fixtures.py.
  CHECK(std::abs(theorem_rhs(1, 1000, 0.05, 1.0) - 0.69027197864161398412) <= 1e-10);
  CHECK(std::abs(theorem_rhs(1, 1000, 0.05, 2.0) - 0.34513598932080699206) <= 1e-10);
  CHECK(std::abs(theorem_rhs(3, 500, 0.1, 0.5) - 5.3063301183684852451) <= 1e-10);

  CHECK_THROWS_AS(theorem_rhs(1, 1, 0.05, 1.0), Error);
  CHECK_THROWS_AS(theorem_rhs(0, 100, 0.05, 1.0), Error);
  CHECK_THROWS_AS(theorem_rhs(1, 100, 1.0, 1.0), Error);
  CHECK_THROWS_AS(theorem_rhs(1, 100, 0.05, 0.0), Error);
}

TEST_CASE("theorem_rhs monotonicity") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (int v = 1; v <= 5; ++v) {
      double previous = std::numeric_limits<double>::infinity();
      for (std::size_t m = 50; m <= 100000; m *= 2) {
        const double r = theorem_rhs(v, m, 0.05, alpha);
        CHECK(r < previous);
        previous = r;
        CHECK(theorem_rhs(v + 1, m, 0.05, alpha) > r);
        CHECK(theorem_rhs(v, m, 0.01, alpha) > r);
      }
    }
  }
}

TEST_CASE("threshold hypotheses") {
  const auto grid = threshold_grid(200);
  CHECK(grid.size() == 200);
  CHECK(grid.front().t == 0.0);
  CHECK(grid.back().t == 1.0);
  CHECK(ThresholdHypothesis(0.3).population_aggregate() == doctest::Approx(0.7));
  CHECK_THROWS_AS(ThresholdHypothesis(1.5), Error);
  const std::vector<double> sample{0.1, 0.2, 0.5, 0.7};
  CHECK(sample_aggregate(sample, 0.5) == 0.5);
  CHECK(sample_aggregate(sample, 0.0) == 1.0);
  CHECK(sample_aggregate(sample, 0.9) == 0.0);
}

TEST_CASE("theorem Monte-Carlo audit holds with margin") {
  for (double alpha : {1.0, 2.0}) {
    const auto r = theorem_mc_audit(1000, 0.05, alpha, 200, 200, RngSeed{1});
    CHECK(r.trials == 200);
    CHECK(r.per_trial.size() == 200);
    CHECK(r.violation_fraction() <= 0.05);
    CHECK(r.mean_slack > 0.0);
    CHECK(r.rhs == theorem_rhs(1, 1000, 0.05, alpha));
  }
}

TEST_CASE("sample aggregates concentrate for large m") {
  const auto r = theorem_mc_audit(100000, 0.05, 1.0, 200, 50, RngSeed{2});
  std::size_t close = 0;
  for (const auto& t : r.per_trial) close += t.max_deviation <= 0.01;
  CHECK(static_cast<double>(close) >= 0.99 * 50);
}

TEST_CASE("lipschitz probe") {
  SUBCASE("value slope bounded by the binary gradient norm for alpha >= 1") {
    for (double alpha : {1.0, 2.0, 3.5}) {
      const auto r = lipschitz_probe(alpha, 20000, 2, RngSeed{3});
      CHECK(r.pairs == 20000);
      CHECK(std::isfinite(r.max_value_slope));
      CHECK(std::isfinite(r.max_gradient_slope));
      CHECK(r.max_value_slope <= binary_gradient_norm_bound(alpha) * (1.0 + 1e-3));
    }
  }
  SUBCASE("alpha = 2 has unit curvature at the diagonal") {
    const std::vector<double> a{0.3, 0.7};
    const std::vector<double> delta{1e-4, -1e-4};
    const auto r = probe_pair(2.0, a, a, delta);
    CHECK(r.max_gradient_slope == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("alpha = 2 gradient slope is bounded for several classes") {
    const auto r = lipschitz_probe(2.0, 20000, 4, RngSeed{4});
    CHECK(r.max_gradient_slope <= 4.0);
  }
  CHECK_THROWS_AS(lipschitz_probe(0.0, 10, 2, RngSeed{}), Error);
}

TEST_CASE("kl slopes diverge near the simplex boundary") {
  const auto slopes = kl_slope_sequence({1e-2, 1e-4, 1e-6});
  REQUIRE(slopes.size() == 3);
  CHECK(slopes[0] < slopes[1]);
  CHECK(slopes[1] < slopes[2]);
  CHECK(slopes[1] > 100.0);
  CHECK(slopes[2] > 1e4);
}

TEST_CASE("gradient_check reports small errors") {
  const auto r = gradient_check({0.5, 2.0}, 10, RngSeed{6});
  CHECK(r.configurations == 60);
  CHECK(r.worst_loss_error <= 1e-5);
  CHECK(r.worst_end_to_end_error <= 1e-4);
  CHECK_THROWS_AS(gradient_check({-1.0}, 1, RngSeed{}), Error);
}
