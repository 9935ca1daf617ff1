#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "stemmaplace/error.hpp"
#include "stemmaplace/evaluation.hpp"
#include "test_util.hpp"

using namespace stemmaplace;
using testutil::error_kind_of;

TEST_CASE("hand-computed scores") {
  auto r = score_estimates({1, 2, 2}, {1, 2, 3});
  CHECK(r.n == 3);
  CHECK(r.correct == 2);
  CHECK(r.ratio == doctest::Approx(2.0 / 3));
  CHECK(r.avg_deviation == doctest::Approx(1.0 / 3));
  CHECK(r.max_dist == 1);
  // Population SD of {0, 0, 1}.
  CHECK(r.sd == doctest::Approx(std::sqrt(2.0 / 9)));

  auto exact = score_estimates({4, 5, 6}, {4, 5, 6});
  CHECK(exact.ratio == 1.0);
  CHECK(exact.avg_deviation == 0.0);
  CHECK(exact.sd == 0.0);
  CHECK(exact.max_dist == 0);
}

TEST_CASE("score errors") {
  CHECK(error_kind_of([] { score_estimates({1}, {1, 2}); }) == ErrorKind::LengthMismatch);
  CHECK(error_kind_of([] { score_estimates({}, {}); }) == ErrorKind::Empty);
}

TEST_CASE("scores are permutation invariant and bounded") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + gen() % 50;
    std::vector<int> e(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      e[i] = 1 + static_cast<int>(gen() % 6);
      t[i] = 1 + static_cast<int>(gen() % 6);
    }
    auto a = score_estimates(e, t);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<int> e2(n), t2(n);
    for (std::size_t i = 0; i < n; ++i) {
      e2[i] = e[perm[i]];
      t2[i] = t[perm[i]];
    }
    auto b = score_estimates(e2, t2);
    REQUIRE(a.correct == b.correct);
    REQUIRE(a.avg_deviation == doctest::Approx(b.avg_deviation));
    REQUIRE(a.sd == doctest::Approx(b.sd));
    REQUIRE(a.max_dist == b.max_dist);
    REQUIRE(a.correct <= a.n);
    REQUIRE(a.max_dist >= a.avg_deviation);
    REQUIRE(a.sd >= 0.0);
  }
}

TEST_CASE("closed-form baseline examples") {
  auto e = expected_baseline({1, 1, 1}, 1, 2);
  CHECK(e.ratio == doctest::Approx(0.5));
  CHECK(e.avg_deviation == doctest::Approx(0.5));
  auto c = expected_baseline({3}, 3, 3);
  CHECK(c.ratio == 1.0);
  CHECK(c.avg_deviation == 0.0);
}

TEST_CASE("closed-form baseline against direct enumeration") {
  std::vector<int> truths{1, 2, 2, 3, 5, 6, 6, 4};
  const int lo = 1, hi = 6;
  double ratio = 0, dev = 0;
  for (int t : truths)
    for (int d = lo; d <= hi; ++d) {
      ratio += (d == t);
      dev += std::abs(d - t);
    }
  const double denom = static_cast<double>(truths.size()) * (hi - lo + 1);
  auto e = expected_baseline(truths, lo, hi);
  CHECK(e.ratio == doctest::Approx(ratio / denom));
  CHECK(e.avg_deviation == doctest::Approx(dev / denom));
}

TEST_CASE("monte carlo agrees with the closed form") {
  std::mt19937_64 gen(3);
  std::vector<int> truths;
  for (int i = 0; i < 240; ++i) truths.push_back(1 + static_cast<int>(gen() % 6));
  auto e = expected_baseline(truths, 1, 6);
  auto r = run_baseline(truths, 1, 6, 2000, 17, 40);
  const double se_ratio = e.ratio_sd / std::sqrt(2000.0);
  const double se_dev = e.avg_deviation_sd / std::sqrt(2000.0);
  CHECK(std::abs(r.mean_ratio - e.ratio) < 4 * se_ratio);
  CHECK(std::abs(r.mean_avg_deviation - e.avg_deviation) < 4 * se_dev);
  CHECK(r.iterations == 2000);
  CHECK(r.empirical_p >= 0.0);
  CHECK(r.empirical_p <= 1.0);
}

TEST_CASE("monte carlo is reproducible and p falls as observed hits rise") {
  std::vector<int> truths(60, 3);
  auto a = run_baseline(truths, 1, 6, 500, 5, 10);
  auto b = run_baseline(truths, 1, 6, 500, 5, 10);
  CHECK(a.mean_ratio == b.mean_ratio);
  CHECK(a.empirical_p == b.empirical_p);
  double prev = 1.0;
  for (std::size_t obs = 0; obs <= 60; ++obs) {
    auto r = run_baseline(truths, 1, 6, 300, 5, obs);
    REQUIRE(r.empirical_p <= prev);
    prev = r.empirical_p;
  }
  CHECK(run_baseline(truths, 1, 6, 300, 5, 0).empirical_p == 1.0);
  CHECK(run_baseline(truths, 1, 6, 300, 5, 61).empirical_p == 0.0);
}

TEST_CASE("baseline errors") {
  CHECK(error_kind_of([] { run_baseline({1}, 3, 2, 10, 1, 0); }) == ErrorKind::BadRange);
  CHECK(error_kind_of([] { run_baseline({}, 1, 2, 10, 1, 0); }) == ErrorKind::Empty);
  CHECK(error_kind_of([] { run_baseline({1}, 1, 2, 0, 1, 0); }) == ErrorKind::Empty);
}

TEST_CASE("results table mentions every metric") {
  auto est = score_estimates({1, 2, 2}, {1, 2, 3});
  auto base = run_baseline({1, 2, 3}, 1, 3, 100, 1, est.correct);
  auto table = format_results_table(est, 0.79, 9.5, 12, 0.21, &base);
  for (const char* key : {"correct", "average deviation", "SD", "max dist", "hitrate", "radius", "empirical p"}) {
    INFO(key);
    CHECK(table.find(key) != std::string::npos);
  }
  auto j = to_json(est);
  CHECK(j["correct"] == 2);
}
