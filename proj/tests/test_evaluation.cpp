#include "fidt/evaluation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "matching_oracle.hpp"
#include "test_support.hpp"

using namespace fidt;
using testutil::make_point_set;
using testutil::oracle_match;

namespace {

PointSet random_small_set(std::mt19937& rng, int max_points) {
  std::uniform_int_distribution<int> count(0, max_points);
  std::uniform_real_distribution<double> coord(0.0, 40.0);
  PointSet ps;
  ps.width = 41;
  ps.height = 41;
  const int n = count(rng);
  ps.points.resize(2, n);
  for (int i = 0; i < n; ++i) {
    ps.points(0, i) = coord(rng);
    ps.points(1, i) = coord(rng);
  }
  return ps;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("identical point sets match perfectly") {
  const PointSet t = make_point_set(100, 100, {{3, 4}, {50, 60}, {90, 10}});
  const MatchReport r = match_points(t, t, SigmaPolicy::Fixed(4.0));
  CHECK(r.true_positives == 3);
  CHECK(r.false_positives == 0);
  CHECK(r.false_negatives == 0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  for (const auto& p : r.pairs) CHECK(p.distance == 0.0);
}

TEST_CASE("worked two-point example") {
  const PointSet truth = make_point_set(100, 100, {{0, 0}, {10, 10}});
  const PointSet pred = make_point_set(100, 100, {{1, 0}, {50, 50}});
  const MatchReport r = match_points(pred, truth, SigmaPolicy::Fixed(4.0));
  CHECK(r.true_positives == 1);
  CHECK(r.false_positives == 1);
  CHECK(r.false_negatives == 1);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].pred_index == 0);
  CHECK(r.pairs[0].gt_index == 0);
  CHECK(r.pairs[0].distance == 1.0);
}

TEST_CASE("assignment matches the exhaustive oracle on small instances") {
  std::mt19937 rng(61);
  for (int iter = 0; iter < 120; ++iter) {
    const PointSet pred = random_small_set(rng, 8);
    const PointSet truth = random_small_set(rng, 8);
    std::uniform_real_distribution<double> su(1.0, 20.0);
    const double sigma = su(rng);
    const MatchReport r = match_points(pred, truth, SigmaPolicy::Fixed(sigma));
    const testutil::OracleMatch o = oracle_match(pred, truth, sigma);
    CHECK(r.true_positives == o.count);
    double total = 0.0;
    for (const auto& p : r.pairs) total += p.distance;
    CHECK(total == doctest::Approx(o.total).epsilon(1e-9));
  }
}

TEST_CASE("matching is one-to-one") {
  std::mt19937 rng(62);
  for (auto algo : {MatchAlgorithm::optimal, MatchAlgorithm::greedy}) {
    for (int iter = 0; iter < 40; ++iter) {
      const PointSet pred = random_small_set(rng, 8);
      const PointSet truth = random_small_set(rng, 8);
      const MatchReport r = match_points(pred, truth, SigmaPolicy::Fixed(6.0), algo);
      std::set<int> preds, gts;
      for (const auto& p : r.pairs) {
        CHECK(preds.insert(p.pred_index).second);
        CHECK(gts.insert(p.gt_index).second);
        CHECK(p.distance <= 6.0);
      }
    }
  }
}

TEST_CASE("true positives grow with the threshold") {
  std::mt19937 rng(63);
  const PointSet pred = random_small_set(rng, 8);
  const PointSet truth = random_small_set(rng, 8);
  int prev = 0;
  for (int sigma = 1; sigma <= 20; ++sigma) {
    const int tp = match_points(pred, truth, SigmaPolicy::Fixed(double(sigma))).true_positives;
    CHECK(tp >= prev);
    prev = tp;
  }
}

TEST_CASE("degenerate empty-set conventions") {
  const PointSet empty = make_point_set(10, 10, {});
  const PointSet one = make_point_set(10, 10, {{5, 5}});

  const MatchReport both = match_points(empty, empty, SigmaPolicy::Fixed(4.0));
  CHECK(both.precision == 1.0);
  CHECK(both.recall == 1.0);
  CHECK(both.f1 == 1.0);

  const MatchReport no_pred = match_points(empty, one, SigmaPolicy::Fixed(4.0));
  CHECK(no_pred.precision == 0.0);
  CHECK(no_pred.recall == 0.0);
  CHECK(no_pred.f1 == 0.0);

  const MatchReport no_truth = match_points(one, empty, SigmaPolicy::Fixed(4.0));
  CHECK(no_truth.precision == 0.0);
  CHECK(no_truth.recall == 0.0);
  CHECK(no_truth.f1 == 0.0);
}

TEST_CASE("box modes use per-ground-truth thresholds") {
  PointSet truth = make_point_set(200, 200, {{50, 50}, {150, 150}});
  PointMatrix boxes(2, 2);
  boxes << 6, 40, 8, 30;  // (w,h) = (6,8) and (40,30)
  truth.boxes = boxes;
  // sigma_s: min(w,h)/2 = 3 and 15; sigma_l: sqrt(w^2+h^2)/2 = 5 and 25
  const PointSet pred = make_point_set(200, 200, {{52, 50}, {150, 130}});

  const MatchReport small = match_points(pred, truth, SigmaPolicy::BoxSmall());
  CHECK(small.true_positives == 1);  // d=2 <= 3 matches the first, d=20 > 15 misses the second
  REQUIRE(small.pairs.size() == 1);
  CHECK(small.pairs[0].gt_index == 0);

  const MatchReport large = match_points(pred, truth, SigmaPolicy::BoxLarge());
  CHECK(large.true_positives == 2);  // 2 <= 5 and 20 <= 25
}

TEST_CASE("box modes require boxes") {
  const PointSet truth = make_point_set(10, 10, {{5, 5}});
  CHECK_THROWS_AS(match_points(truth, truth, SigmaPolicy::BoxSmall()), InvalidArgument);
  CHECK_THROWS_AS(match_points(truth, truth, SigmaPolicy::BoxLarge()), InvalidArgument);
}

TEST_CASE("negative coordinates are rejected") {
  PointSet bad;
  bad.width = 10;
  bad.height = 10;
  bad.points.resize(2, 1);
  bad.points(0, 0) = -1.0;
  bad.points(1, 0) = 2.0;
  const PointSet truth = make_point_set(10, 10, {{5, 5}});
  CHECK_THROWS_AS(match_points(bad, truth, SigmaPolicy::Fixed(4.0)), InvalidArgument);
}

TEST_CASE("greedy pairs nearest first") {
  // gt g0 lies between two predictions; greedy gives g0 to the closer one
  const PointSet truth = make_point_set(100, 100, {{10, 10}});
  const PointSet pred = make_point_set(100, 100, {{13, 10}, {9, 10}});
  const MatchReport r = match_points(pred, truth, SigmaPolicy::Fixed(5.0),
                                     MatchAlgorithm::greedy);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].pred_index == 1);
  CHECK(r.pairs[0].distance == 1.0);
}

TEST_CASE("greedy can match fewer pairs than the optimal assignment") {
  // taking the nearest pair first (p0-g0 at distance 1) blocks the only
  // partner p1 has, while the optimal assignment matches both
  const PointSet truth = make_point_set(100, 100, {{2, 0}, {5, 0}});
  const PointSet pred = make_point_set(100, 100, {{3, 0}, {1, 0}});
  const MatchReport optimal = match_points(pred, truth, SigmaPolicy::Fixed(2.0));
  const MatchReport greedy =
      match_points(pred, truth, SigmaPolicy::Fixed(2.0), MatchAlgorithm::greedy);
  CHECK(optimal.true_positives == 2);
  CHECK(greedy.true_positives == 1);
  REQUIRE(greedy.pairs.size() == 1);
  CHECK(greedy.pairs[0].pred_index == 0);
  CHECK(greedy.pairs[0].gt_index == 0);
}

TEST_CASE("sweep averages across thresholds") {
  const PointSet t = make_point_set(200, 200, {{100, 100}});
  const SweepResult same = evaluate_localization_sweep(t, t);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  // single prediction at distance 50.5: matched for sigma in {51..100}
  const PointSet pred = make_point_set(200, 200, {{100, 150.5}});
  const SweepResult halfway = evaluate_localization_sweep(pred, t);
  CHECK(halfway.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(halfway.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(halfway.f1 == doctest::Approx(0.5).epsilon(1e-12));

  const PointSet far = make_point_set(2000, 2000, {{1500, 1500}});
  PointSet far_truth = make_point_set(2000, 2000, {{100, 100}});
  const SweepResult none = evaluate_localization_sweep(far, far_truth);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("sweep rejects empty ranges") {
  const PointSet t = make_point_set(10, 10, {{5, 5}});
  CHECK_THROWS_AS(evaluate_localization_sweep(t, t, {5, 4}), InvalidArgument);
  CHECK_THROWS_AS(evaluate_localization_sweep(t, t, {0, 10}), InvalidArgument);
}

TEST_CASE("counting errors") {
  CHECK(counting_errors({5, 7, 9}, {5, 7, 9}).mae == 0.0);
  CHECK(counting_errors({5, 7, 9}, {5, 7, 9}).mse == 0.0);

  const CountingErrors worked = counting_errors({10, 20}, {12, 16});
  CHECK(worked.mae == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(worked.mse == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));

  const CountingErrors single = counting_errors({0}, {5});
  CHECK(single.mae == 5.0);
  CHECK(single.mse == 5.0);

  CHECK_THROWS_AS(counting_errors({1}, {1, 2}), InvalidArgument);
  CHECK_THROWS_AS(counting_errors({}, {}), InvalidArgument);
}

TEST_CASE("scene buckets follow the published ranges") {
  CHECK(scene_bucket(0) == 0);
  CHECK(scene_bucket(1) == 1);
  CHECK(scene_bucket(100) == 1);
  CHECK(scene_bucket(101) == 2);
  CHECK(scene_bucket(500) == 2);
  CHECK(scene_bucket(501) == 3);
  CHECK(scene_bucket(5000) == 3);
  CHECK(scene_bucket(5001) == 4);
}

TEST_CASE("single-bucket report equals the global MAE") {
  const std::vector<std::pair<double, double>> imgs{{12, 10}, {8, 10}, {15, 10}};
  const SceneReport r = scene_level_report(imgs);
  CHECK(r.images[1] == 3);
  CHECK(r.mae[1] == doctest::Approx((2 + 2 + 5) / 3.0).epsilon(1e-12));
  CHECK(r.average == doctest::Approx(r.mae[1]).epsilon(1e-12));
}

TEST_CASE("bucket average is unweighted") {
  // bucket S1 MAE 2 (one image), bucket S2 MAE 4 (three images)
  const std::vector<std::pair<double, double>> imgs{
      {52, 50}, {204, 200}, {196, 200}, {204, 200}};
  const SceneReport r = scene_level_report(imgs);
  CHECK(r.mae[1] == doctest::Approx(2.0));
  CHECK(r.mae[2] == doctest::Approx(4.0));
  CHECK(r.average == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::isnan(r.mae[0]));
  CHECK_THROWS_AS(scene_level_report({}), InvalidArgument);
}

}  // TEST_SUITE
