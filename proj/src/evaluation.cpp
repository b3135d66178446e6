#include "fidt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fidt {

void derive_rates(int tp, int fp, int fn, double& precision, double& recall, double& f1) {
  precision = (tp + fp > 0) ? double(tp) / (tp + fp) : (fn == 0 ? 1.0 : 0.0);
  recall = (tp + fn > 0) ? double(tp) / (tp + fn) : (fp == 0 ? 1.0 : 0.0);
  f1 = (precision + recall > 0.0) ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Jonker-Volgenant style shortest augmenting path assignment with potentials.
// cost is n x m with n <= m; returns, per row, the assigned column.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost, int n,
                                  int m) {
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(m) + 1, 0);    // column -> assigned row
  std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[static_cast<std::size_t>(p[j]) - 1] = j - 1;
  return row_to_col;
}

std::vector<double> per_truth_sigma(const PointSet& truth, const SigmaPolicy& policy) {
  std::vector<double> sigma(static_cast<std::size_t>(truth.size()));
  switch (policy.mode) {
    case SigmaPolicy::Mode::fixed:
      if (!(policy.fixed_sigma > 0.0))
        throw InvalidArgument("match_points: fixed sigma must be > 0");
      std::fill(sigma.begin(), sigma.end(), policy.fixed_sigma);
      break;
    case SigmaPolicy::Mode::box_small:
    case SigmaPolicy::Mode::box_large: {
      if (!truth.boxes)
        throw InvalidArgument("match_points: box sigma mode requires ground-truth boxes");
      for (Eigen::Index j = 0; j < truth.size(); ++j) {
        const double w = (*truth.boxes)(0, j), h = (*truth.boxes)(1, j);
        sigma[static_cast<std::size_t>(j)] = policy.mode == SigmaPolicy::Mode::box_small
                                                 ? std::min(w, h) / 2.0
                                                 : std::hypot(w, h) / 2.0;
      }
      break;
    }
    case SigmaPolicy::Mode::sweep:
      throw InvalidArgument(
          "match_points: sweep policy is handled by evaluate_localization_sweep");
  }
  return sigma;
}

void require_nonnegative(const PointSet& ps, const char* role) {
  if (ps.points.size() > 0 && (ps.points.array() < 0.0).any())
    throw InvalidArgument(std::string("match_points: negative ") + role + " coordinate");
  if (ps.points.size() > 0 && !ps.points.allFinite())
    throw InvalidArgument(std::string("match_points: non-finite ") + role + " coordinate");
}

MatchReport greedy_match(const PointSet& predicted, const PointSet& truth,
                         const std::vector<double>& sigma) {
  struct Candidate {
    double distance;
    int pred, gt;
  };
  std::vector<Candidate> candidates;
  for (Eigen::Index i = 0; i < predicted.size(); ++i)
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
      const double d = (predicted.points.col(i) - truth.points.col(j)).norm();
      if (d <= sigma[static_cast<std::size_t>(j)])
        candidates.push_back({d, static_cast<int>(i), static_cast<int>(j)});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.pred, a.gt) < std::tie(b.distance, b.pred, b.gt);
  });

  std::vector<char> pred_used(static_cast<std::size_t>(predicted.size()), 0);
  std::vector<char> gt_used(static_cast<std::size_t>(truth.size()), 0);
  MatchReport report;
  for (const auto& c : candidates) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = gt_used[c.gt] = 1;
    report.pairs.push_back({c.pred, c.gt, c.distance});
  }
  return report;
}

MatchReport optimal_match(const PointSet& predicted, const PointSet& truth,
                          const std::vector<double>& sigma) {
  const int np = static_cast<int>(predicted.size());
  const int ng = static_cast<int>(truth.size());
  // Feasible distances; BIG exceeds any total feasible cost so cardinality
  // dominates and total distance breaks ties.
  std::vector<std::vector<double>> dist(static_cast<std::size_t>(np),
                                        std::vector<double>(static_cast<std::size_t>(ng)));
  double feasible_sum = 0.0;
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < ng; ++j) {
      const double d = (predicted.points.col(i) - truth.points.col(j)).norm();
      if (d <= sigma[static_cast<std::size_t>(j)]) {
        dist[i][j] = d;
        feasible_sum += d;
      } else {
        dist[i][j] = kInfeasible;
      }
    }
  const double big = feasible_sum + 1.0;

  const int side = std::max(np, ng);
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(side),
                                        std::vector<double>(static_cast<std::size_t>(side), 0.0));
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      cost[i][j] = (i < np && j < ng) ? (dist[i][j] == kInfeasible ? big : dist[i][j]) : 0.0;

  const std::vector<int> row_to_col = solve_assignment(cost, side, side);
  MatchReport report;
  for (int i = 0; i < np; ++i) {
    const int j = row_to_col[static_cast<std::size_t>(i)];
    if (j >= 0 && j < ng && dist[i][j] != kInfeasible)
      report.pairs.push_back({i, j, dist[i][j]});
  }
  std::sort(report.pairs.begin(), report.pairs.end(),
            [](const MatchPair& a, const MatchPair& b) { return a.pred_index < b.pred_index; });
  return report;
}

}  // namespace

MatchReport match_points(const PointSet& predicted, const PointSet& truth,
                         const SigmaPolicy& policy, MatchAlgorithm algorithm) {
  require_nonnegative(predicted, "prediction");
  require_nonnegative(truth, "ground-truth");
  const std::vector<double> sigma = per_truth_sigma(truth, policy);

  MatchReport report = algorithm == MatchAlgorithm::optimal
                           ? optimal_match(predicted, truth, sigma)
                           : greedy_match(predicted, truth, sigma);
  report.true_positives = static_cast<int>(report.pairs.size());
  report.false_positives = static_cast<int>(predicted.size()) - report.true_positives;
  report.false_negatives = static_cast<int>(truth.size()) - report.true_positives;
  derive_rates(report.true_positives, report.false_positives, report.false_negatives,
               report.precision, report.recall, report.f1);
  return report;
}

SweepResult evaluate_localization_sweep(const PointSet& predicted, const PointSet& truth,
                                        std::pair<int, int> range,
                                        MatchAlgorithm algorithm) {
  if (range.first > range.second || range.first < 1)
    throw InvalidArgument("evaluate_localization_sweep: empty or invalid threshold range");
  double psum = 0.0, rsum = 0.0;
  for (int s = range.first; s <= range.second; ++s) {
    const MatchReport r =
        match_points(predicted, truth, SigmaPolicy::Fixed(double(s)), algorithm);
    psum += r.precision;
    rsum += r.recall;
  }
  const double steps = double(range.second - range.first + 1);
  SweepResult result{psum / steps, rsum / steps, 0.0};
  result.f1 = (result.precision + result.recall > 0.0)
                  ? 2.0 * result.precision * result.recall /
                        (result.precision + result.recall)
                  : 0.0;
  return result;
}

CountingErrors counting_errors(const std::vector<double>& predicted_counts,
                               const std::vector<double>& truth_counts) {
  if (predicted_counts.empty())
    throw InvalidArgument("counting_errors: empty count lists");
  if (predicted_counts.size() != truth_counts.size())
    throw InvalidArgument("counting_errors: count list length mismatch (" +
                          std::to_string(predicted_counts.size()) + " vs " +
                          std::to_string(truth_counts.size()) + ")");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < predicted_counts.size(); ++i) {
    const double diff = predicted_counts[i] - truth_counts[i];
    abs_sum += std::abs(diff);
    sq_sum += diff * diff;
  }
  const double n = double(predicted_counts.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

int scene_bucket(double truth_count) {
  if (truth_count <= 0.0) return 0;
  if (truth_count <= 100.0) return 1;
  if (truth_count <= 500.0) return 2;
  if (truth_count <= 5000.0) return 3;
  return 4;
}

SceneReport scene_level_report(
    const std::vector<std::pair<double, double>>& predicted_truth_counts) {
  if (predicted_truth_counts.empty())
    throw InvalidArgument("scene_level_report: no images");
  std::array<double, 5> abs_sum{};
  SceneReport report;
  for (const auto& [pred, truth] : predicted_truth_counts) {
    const int b = scene_bucket(truth);
    abs_sum[static_cast<std::size_t>(b)] += std::abs(pred - truth);
    ++report.images[static_cast<std::size_t>(b)];
  }
  double total = 0.0;
  int populated = 0;
  for (std::size_t b = 0; b < 5; ++b) {
    if (report.images[b] > 0) {
      report.mae[b] = abs_sum[b] / report.images[b];
      total += report.mae[b];
      ++populated;
    } else {
      report.mae[b] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  report.average = total / populated;
  return report;
}

}  // namespace fidt
