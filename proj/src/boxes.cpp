#include "fidt/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace fidt {

void validate(const BoxParams& params) {
  if (params.k < 1) throw InvalidArgument("BoxParams: k must be >= 1");
  if (!(params.f > 0.0)) throw InvalidArgument("BoxParams: f must be > 0");
  if (!(params.cap_fraction > 0.0))
    throw InvalidArgument("BoxParams: cap_fraction must be > 0");
}

Eigen::AlignedBox2d PseudoBox::clipped(int image_width, int image_height) const {
  const double half = size / 2.0;
  Eigen::AlignedBox2d box(center - Eigen::Vector2d(half, half),
                          center + Eigen::Vector2d(half, half));
  return box.intersection(
      Eigen::AlignedBox2d(Eigen::Vector2d(0, 0),
                          Eigen::Vector2d(image_width, image_height)));
}

namespace {

// Uniform bucket grid over the point bounding box. Exact k-NN: rings of
// cells are expanded until the k-th best distance is certainly inside the
// scanned area.
class BucketGrid {
 public:
  explicit BucketGrid(const PointMatrix& points) : points_(points) {
    const Eigen::Index n = points.cols();
    min_ = points.rowwise().minCoeff();
    const Eigen::Vector2d max = points.rowwise().maxCoeff();
    const double extent = std::max((max - min_).maxCoeff(), 1e-9);
    // ~2 points per cell on average
    cell_ = std::max(extent / std::max(1.0, std::sqrt(double(n) / 2.0)), 1e-9);
    gx_ = static_cast<int>((max.x() - min_.x()) / cell_) + 1;
    gy_ = static_cast<int>((max.y() - min_.y()) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(gx_) * gy_);
    for (Eigen::Index i = 0; i < n; ++i)
      buckets_[cell_index(points.col(i))].push_back(static_cast<int>(i));
  }

  // k smallest distances from point `self` to the other points, ascending.
  std::vector<double> neighbor_distances(Eigen::Index self, int k) const {
    const Eigen::Vector2d p = points_.col(self);
    const int cx = static_cast<int>((p.x() - min_.x()) / cell_);
    const int cy = static_cast<int>((p.y() - min_.y()) / cell_);
    std::vector<double> best;  // max-heap of the k best squared distances
    const int max_ring = std::max(gx_, gy_);
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Everything not yet scanned is at least (ring - 1) * cell_ away.
      if (static_cast<int>(best.size()) == k && ring > 1 &&
          best.front() <= (ring - 1) * cell_ * (ring - 1) * cell_)
        break;
      for (int y = cy - ring; y <= cy + ring; ++y) {
        if (y < 0 || y >= gy_) continue;
        const bool edge_row = (y == cy - ring || y == cy + ring);
        const int step = edge_row ? 1 : 2 * ring;
        for (int x = cx - ring; x <= cx + ring; x += std::max(step, 1)) {
          if (x < 0 || x >= gx_) continue;
          for (int idx : buckets_[static_cast<std::size_t>(y) * gx_ + x]) {
            if (idx == self) continue;
            const double d2 = (points_.col(idx) - p).squaredNorm();
            if (static_cast<int>(best.size()) < k) {
              best.push_back(d2);
              std::push_heap(best.begin(), best.end());
            } else if (d2 < best.front()) {
              std::pop_heap(best.begin(), best.end());
              best.back() = d2;
              std::push_heap(best.begin(), best.end());
            }
          }
        }
        if (ring == 0) break;
      }
    }
    std::sort(best.begin(), best.end());
    for (double& d : best) d = std::sqrt(d);
    return best;
  }

 private:
  std::size_t cell_index(const Eigen::Vector2d& p) const {
    const int x = static_cast<int>((p.x() - min_.x()) / cell_);
    const int y = static_cast<int>((p.y() - min_.y()) / cell_);
    return static_cast<std::size_t>(std::clamp(y, 0, gy_ - 1)) * gx_ +
           static_cast<std::size_t>(std::clamp(x, 0, gx_ - 1));
  }

  const PointMatrix& points_;
  Eigen::Vector2d min_;
  double cell_ = 1.0;
  int gx_ = 1, gy_ = 1;
  std::vector<std::vector<int>> buckets_;
};

std::vector<double> knn_exhaustive(const PointMatrix& points, Eigen::Index self, int k) {
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(points.cols()) - 1);
  for (Eigen::Index j = 0; j < points.cols(); ++j)
    if (j != self) d2.push_back((points.col(j) - points.col(self)).squaredNorm());
  const std::size_t keep = std::min<std::size_t>(d2.size(), static_cast<std::size_t>(k));
  std::partial_sort(d2.begin(), d2.begin() + keep, d2.end());
  d2.resize(keep);
  for (double& d : d2) d = std::sqrt(d);
  return d2;
}

double mean_ascending(const std::vector<double>& distances) {
  return std::accumulate(distances.begin(), distances.end(), 0.0) /
         static_cast<double>(distances.size());
}

}  // namespace

std::vector<double> knn_mean_distances(const PointMatrix& points, int k) {
  if (k < 1) throw InvalidArgument("knn_mean_distances: k must be >= 1");
  const Eigen::Index n = points.cols();
  std::vector<double> means(static_cast<std::size_t>(n), -1.0);
  if (n < 2) return means;

  if (n <= 64) {
    for (Eigen::Index i = 0; i < n; ++i)
      means[static_cast<std::size_t>(i)] = mean_ascending(knn_exhaustive(points, i, k));
    return means;
  }
  const BucketGrid grid(points);
  for (Eigen::Index i = 0; i < n; ++i)
    means[static_cast<std::size_t>(i)] =
        mean_ascending(grid.neighbor_distances(i, k));
  return means;
}

std::vector<PseudoBox> generate_boxes(const PointSet& points, const BoxParams& params) {
  validate(params);
  validate(points);
  if (points.empty()) throw InvalidArgument("generate_boxes: empty point set");

  const double cap = params.cap_fraction * std::min(points.width, points.height);
  const std::vector<double> means = knn_mean_distances(points.points, params.k);

  std::vector<PseudoBox> boxes;
  boxes.reserve(means.size());
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    const double mean = means[static_cast<std::size_t>(i)];
    const double side = mean < 0.0 ? cap : std::min(params.f * mean, cap);
    boxes.push_back({points.points.col(i), side});
  }
  return boxes;
}

}  // namespace fidt
