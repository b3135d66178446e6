#pragma once

#include "fidt/types.hpp"

#include <array>
#include <utility>
#include <vector>

namespace fidt {

// Distance criterion under which a prediction may match a ground-truth point.
struct SigmaPolicy {
  enum class Mode { fixed, box_small, box_large, sweep };

  Mode mode = Mode::fixed;
  double fixed_sigma = 4.0;
  int sweep_lo = 1;
  int sweep_hi = 100;

  static SigmaPolicy Fixed(double sigma) { return {Mode::fixed, sigma, 1, 100}; }
  static SigmaPolicy BoxSmall() { return {Mode::box_small, 0.0, 1, 100}; }
  static SigmaPolicy BoxLarge() { return {Mode::box_large, 0.0, 1, 100}; }
  static SigmaPolicy Sweep(int lo = 1, int hi = 100) { return {Mode::sweep, 0.0, lo, hi}; }
};

enum class MatchAlgorithm { optimal, greedy };

struct MatchPair {
  int pred_index;
  int gt_index;
  double distance;
};

// One-to-one correspondence between predictions and ground truth, with the
// derived rates. 0/0 conventions: both sets empty -> P = R = F1 = 1;
// otherwise an empty numerator side reports 0.
struct MatchReport {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  std::vector<MatchPair> pairs;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision, recall, f1 from tallies under the conventions above.
void derive_rates(int tp, int fp, int fn, double& precision, double& recall, double& f1);

// Minimum-total-distance one-to-one assignment restricted to pairs within the
// applicable sigma (per-ground-truth sigma in box modes, global in fixed
// mode), maximizing the match count first. `greedy` pairs nearest-first
// instead, for cross-checking against benchmark behavior.
MatchReport match_points(const PointSet& predicted, const PointSet& truth,
                         const SigmaPolicy& policy,
                         MatchAlgorithm algorithm = MatchAlgorithm::optimal);

struct SweepResult {
  double precision = 0.0;  // averaged across thresholds
  double recall = 0.0;     // averaged across thresholds
  double f1 = 0.0;         // computed from the averaged P and R
};

// match_points at every integer sigma in [lo, hi].
SweepResult evaluate_localization_sweep(const PointSet& predicted, const PointSet& truth,
                                        std::pair<int, int> range = {1, 100},
                                        MatchAlgorithm algorithm = MatchAlgorithm::optimal);

struct CountingErrors {
  double mae = 0.0;
  double mse = 0.0;  // root-mean-square, named per the reporting convention
};

CountingErrors counting_errors(const std::vector<double>& predicted_counts,
                               const std::vector<double>& truth_counts);

// Scene buckets by truth count: S0 = 0, S1 = (0,100], S2 = (100,500],
// S3 = (500,5000], S4 = > 5000.
int scene_bucket(double truth_count);

struct SceneReport {
  std::array<double, 5> mae{};   // NaN where a bucket has no images
  std::array<int, 5> images{};
  double average = 0.0;          // unweighted mean over non-empty buckets
};

SceneReport scene_level_report(
    const std::vector<std::pair<double, double>>& predicted_truth_counts);

}  // namespace fidt
