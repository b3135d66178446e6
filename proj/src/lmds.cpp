#include "fidt/lmds.hpp"

#include <deque>
#include <unordered_set>

namespace fidt {

void validate(const LmdsParams& params) {
  if (!(params.threshold_ratio > 0.0 && params.threshold_ratio < 1.0))
    throw InvalidArgument("LmdsParams: threshold_ratio must be in (0, 1)");
  if (!(params.negative_cutoff > 0.0))
    throw InvalidArgument("LmdsParams: negative_cutoff must be > 0");
  if (params.pool_size < 3 || params.pool_size % 2 == 0)
    throw InvalidArgument("LmdsParams: pool_size must be odd and >= 3");
}

namespace {

// Keep the first pixel (row-major) of every 8-connected, equal-valued group
// of survivors.
std::vector<Eigen::Vector2i> dedup_plateau_pixels(const std::vector<Eigen::Vector2i>& coords,
                                                  const DenseMap& map) {
  std::unordered_set<long long> alive;
  const long long w = map.cols();
  auto key = [w](int x, int y) { return static_cast<long long>(y) * w + x; };
  for (const auto& c : coords) alive.insert(key(c.x(), c.y()));

  std::vector<Eigen::Vector2i> kept;
  std::unordered_set<long long> visited;
  for (const auto& c : coords) {
    if (visited.count(key(c.x(), c.y()))) continue;
    kept.push_back(c);
    const double value = map(c.y(), c.x());
    std::deque<Eigen::Vector2i> frontier{c};
    visited.insert(key(c.x(), c.y()));
    while (!frontier.empty()) {
      const Eigen::Vector2i p = frontier.front();
      frontier.pop_front();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = p.x() + dx, ny = p.y() + dy;
          if (nx < 0 || ny < 0 || nx >= map.cols() || ny >= map.rows()) continue;
          const long long nk = key(nx, ny);
          if (!alive.count(nk) || visited.count(nk)) continue;
          if (map(ny, nx) != value) continue;
          visited.insert(nk);
          frontier.push_back({nx, ny});
        }
      }
    }
  }
  return kept;
}

}  // namespace

DetectionResult detect(const DenseMap& map, const LmdsParams& params) {
  validate(params);
  if (map.size() == 0) throw InvalidArgument("detect: empty map");
  if (!map.allFinite()) throw InvalidArgument("detect: map entries must be finite");

  const DenseMap pooled = max_filter(map, params.pool_size);
  const DenseMap matrix =
      (pooled == map).select(map, DenseMap::Zero(map.rows(), map.cols()));

  DetectionResult result;
  result.max_value = matrix.maxCoeff();
  if (result.max_value < params.negative_cutoff) {
    result.is_negative = true;
    return result;
  }

  const double threshold = params.threshold_ratio * result.max_value;
  for (Eigen::Index y = 0; y < matrix.rows(); ++y)
    for (Eigen::Index x = 0; x < matrix.cols(); ++x)
      if (matrix(y, x) >= threshold)
        result.coordinates.emplace_back(static_cast<int>(x), static_cast<int>(y));

  if (params.dedup_plateaus)
    result.coordinates = dedup_plateau_pixels(result.coordinates, map);

  result.count = static_cast<int>(result.coordinates.size());
  return result;
}

int count(const DenseMap& map, const LmdsParams& params) {
  return detect(map, params).count;
}

}  // namespace fidt
