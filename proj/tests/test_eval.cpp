#include <cmath>
#include <random>

#include "doctest.h"
#include "geore/eval.hpp"
#include "geore/rng.hpp"

using namespace geore;
using namespace geore::eval;

TEST_CASE("filtered rank") {
  SUBCASE("unique maximum ranks first") {
    CHECK(filtered_rank({0.1, 0.9, 0.3}, 1, {}) == 1);
  }
  SUBCASE("ties count pessimistically by default") {
    CHECK(filtered_rank(Vec(10, 0.5), 3, {}) == 10);
    CHECK(filtered_rank(Vec(10, 0.5), 3, {}, TiePolicy::Optimistic) == 1);
  }
  SUBCASE("filtering a higher-scoring known-true lowers the rank") {
    const Vec scores = {0.9, 0.8, 0.7};
    CHECK(filtered_rank(scores, 2, {}) == 3);
    CHECK(filtered_rank(scores, 2, {0}) == 2);
  }
  SUBCASE("the true candidate itself is never filtered") {
    CHECK(filtered_rank({0.9, 0.1}, 0, {0}) == 1);
  }
  SUBCASE("filtered rank never exceeds the raw rank") {
    std::mt19937_64 rng = rng_stream(71, "rank");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < 50; ++it) {
      Vec scores(20);
      for (double& s : scores) s = u(rng);
      std::set<int> known = {1, 4, 7};
      CHECK(filtered_rank(scores, 9, known) <= raw_rank(scores, 9));
    }
  }
}

TEST_CASE("aggregate metrics") {
  const std::vector<int> ones = {1, 1, 1};
  CHECK(mrr(ones) == 1.0);
  CHECK(hits_at(ones, 1) == 1.0);
  CHECK(mean_rank(ones) == 1.0);

  const std::vector<int> mixed = {1, 2, 4};
  CHECK(mrr(mixed) == doctest::Approx((1.0 + 0.5 + 0.25) / 3.0));
  CHECK(hits_at(mixed, 3) == doctest::Approx(2.0 / 3.0));
  CHECK(mean_rank(mixed) == doctest::Approx(7.0 / 3.0));

  CHECK_THROWS_AS(mrr({}), Error);
  CHECK_THROWS_AS(mean_rank({}), Error);

  // MRR strictly decreases when any single rank increases
  std::vector<int> worse = mixed;
  worse[1] = 3;
  CHECK(mrr(worse) < mrr(mixed));
}

TEST_CASE("AUC") {
  CHECK(auc({2.0, 3.0}, {0.0, 1.0}) == 1.0);
  CHECK(auc({1.0}, {1.0}) == 0.5);  // tie credit

  std::mt19937_64 rng = rng_stream(72, "auc");
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec pos(30), neg(40);
  for (double& s : pos) s = u(rng);
  for (double& s : neg) s = u(rng);
  const double base = auc(pos, neg);

  // invariant under strictly monotone transformation
  Vec pos_t = pos, neg_t = neg;
  auto mono = [](double x) { return std::exp(0.7 * x) + 3.0; };
  for (double& s : pos_t) s = mono(s);
  for (double& s : neg_t) s = mono(s);
  CHECK(auc(pos_t, neg_t) == doctest::Approx(base).epsilon(1e-12));

  // matches the O(n*m) pair-counting oracle
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  CHECK(base == doctest::Approx(wins / (pos.size() * neg.size())).epsilon(1e-12));

  CHECK_THROWS_AS(auc({}, {1.0}), Error);
}

TEST_CASE("containment accuracy") {
  using boxes::Box;
  const Box inner(Vec{0.2, 0.2}, Vec{0.4, 0.4});
  const Box outer(Vec{0.0, 0.0}, Vec{1.0, 1.0});
  CHECK(containment_accuracy({{inner, outer}, {inner, outer}}) == 1.0);
  CHECK(containment_accuracy({{outer, inner}}) == 0.0);
  CHECK(containment_accuracy({{inner, outer}, {outer, inner}}) == doctest::Approx(0.5));
}

TEST_CASE("summaries and parallel scoring") {
  const std::vector<int> ranks = {1, 2, 10, 40};
  const RankingSummary s = summarize(ranks);
  CHECK(s.n == 4);
  CHECK(s.hits10 == doctest::Approx(0.75));

  // parallel_for fills every slot exactly once regardless of thread count
  std::vector<int> out(100, 0);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i) + 1; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) + 1);
}
