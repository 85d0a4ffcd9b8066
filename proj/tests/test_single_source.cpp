#include <catch2/catch_amalgamated.hpp>

#include "persuasion/oracle.hpp"
#include "persuasion/single_source.hpp"

#include "test_util.hpp"

using namespace persuasion;
using Catch::Matchers::WithinAbs;

TEST_CASE("single-source equilibrium, frozen points") {
  const SourceParams src{1.0, 2.0};

  SECTION("enough budget: pay c_min, pour the rest into s") {
    const auto out = solve_single(src, 0.5, 3.0);
    REQUIRE(out.policy.rates.size() == 1);
    CHECK_THAT(out.policy.rates[0].s, WithinAbs(2.0, 1e-15));
    CHECK_THAT(out.policy.rates[0].c, WithinAbs(1.0, 1e-15));
    CHECK(out.responses[0] == BestResponse::FollowSender);
    CHECK_THAT(out.sender_utility, WithinAbs(4.0 / 9.0, 1e-15));
    CHECK_THAT(out.receiver_utility, WithinAbs(1.0 / 3.0, 1e-15));
    CHECK(out.active_set == std::vector<std::size_t>{0});
  }

  SECTION("budget below c_min: no persuasion possible") {
    const auto out = solve_single(src, 0.5, 0.5);
    CHECK(out.policy.rates[0].s == 0.0);
    CHECK(out.policy.rates[0].c == 0.0);
    CHECK(out.responses[0] == BestResponse::Default);
    CHECK(out.sender_utility == 0.0);
    CHECK_THAT(out.receiver_utility, WithinAbs(1.0 / 3.0, 1e-15));
    CHECK(out.active_set.empty());
  }

  SECTION("budget exactly c_min: receiver follows, sender earns nothing") {
    const auto out = solve_single(src, 0.5, 1.0);
    CHECK(out.policy.rates[0].s == 0.0);
    CHECK_THAT(out.policy.rates[0].c, WithinAbs(1.0, 1e-15));
    CHECK(out.responses[0] == BestResponse::FollowSender);
    CHECK(out.sender_utility == 0.0);
    CHECK(out.active_set.empty());
  }

  CHECK_THROWS_AS(solve_single({2.0, 1.0}, 0.5, 3.0), InvalidInstance);
}

TEST_CASE("single-source value is monotone in the budget and saturates") {
  test_util::Gen gen(201);
  for (int rep = 0; rep < 20; ++rep) {
    const double q = gen.uniform(0.25, 0.75);
    const auto src = gen.valid_source(q);
    double prev = -1.0;
    for (double r = 0.0; r <= 12.0; r += 0.25) {
      const double u = solve_single(src, q, r).sender_utility;
      CHECK(u >= prev - 1e-12);
      prev = u;
    }
    // As the budget grows, the value saturates at the s -> infinity limit
    // of the utility with c pinned to c_min: the estimate is 1 throughout
    // every 1-sojourn plus the head of each 0-sojourn until a c-sample.
    const double cmin = c_min(src, q);
    const double cap = src.lambda * (cmin + src.lambda + src.mu) /
                       ((src.mu + src.lambda) * (src.lambda + cmin));
    const double u_large = solve_single(src, q, 1e6).sender_utility;
    CHECK(u_large <= cap + 1e-12);
    CHECK_THAT(u_large, WithinAbs(cap, 1e-3));
  }
}

TEST_CASE("single-source receiver utility pins to the default") {
  test_util::Gen gen(202);
  for (int rep = 0; rep < 50; ++rep) {
    const double q = gen.uniform(0.25, 0.75);
    const auto src = gen.valid_source(q);
    const double cmin = c_min(src, q);
    const double r = cmin + gen.uniform(0.0, 8.0);
    const auto out = solve_single(src, q, r);
    CHECK_THAT(out.receiver_utility,
               WithinAbs(receiver_default_utility(src, q), 1e-12));
    // The budget binds.
    CHECK_THAT(out.budget_usage(), WithinAbs(r, 1e-12));
  }
}

TEST_CASE("single-source equilibrium beats the grid oracle") {
  test_util::Gen gen(203);
  for (int rep = 0; rep < 6; ++rep) {
    const double q = gen.uniform(0.3, 0.7);
    const auto src = gen.valid_source(q, 0.2, 1.5);
    const double r = gen.uniform(0.5, 5.0);
    const ProblemInstance instance({src}, q, r);

    const auto exact = solve_single(src, q, r);
    const auto grid = grid_oracle(instance, GridSpec{0.01, 1});
    CHECK(exact.sender_utility >= grid.utility - 1e-12);
    CHECK_THAT(exact.sender_utility, WithinAbs(grid.utility, 0.05));  // max(1e-3, 5*step)
  }
}
