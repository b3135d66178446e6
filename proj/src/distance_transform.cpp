#include "fidt/distance_transform.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

namespace fidt {

namespace {

void require_grid(const PointSet& annotations) {
  if (annotations.width < 1 || annotations.height < 1)
    throw InvalidArgument("distance_transform: grid must be at least 1x1");
  validate(annotations);
}

}  // namespace

double empty_set_distance(int width, int height) {
  return std::sqrt(double(width) * width + double(height) * height);
}

std::vector<Eigen::Vector2i> rounded_seeds(const PointSet& annotations) {
  std::vector<Eigen::Vector2i> seeds;
  seeds.reserve(static_cast<std::size_t>(annotations.points.cols()));
  std::unordered_set<long long> seen;
  for (Eigen::Index i = 0; i < annotations.points.cols(); ++i) {
    const Eigen::Vector2i px = round_to_pixel(annotations.points(0, i),
                                              annotations.points(1, i),
                                              annotations.width, annotations.height);
    const long long key =
        static_cast<long long>(px.y()) * annotations.width + px.x();
    if (seen.insert(key).second) seeds.push_back(px);
  }
  return seeds;
}

DenseMap distance_transform(const PointSet& annotations) {
  require_grid(annotations);
  const int w = annotations.width, h = annotations.height;
  DenseMap out(h, w);

  const std::vector<Eigen::Vector2i> seeds = rounded_seeds(annotations);
  if (seeds.empty()) {
    out.setConstant(empty_set_distance(w, h));
    return out;
  }

  constexpr int kNoSeed = std::numeric_limits<int>::max();

  // Pass 1: per column, row distance to the nearest seed in that column
  // (kNoSeed where the column has none). Two linear sweeps.
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> colDist(h, w);
  colDist.setConstant(kNoSeed);
  for (const auto& s : seeds) colDist(s.y(), s.x()) = 0;
  for (int x = 0; x < w; ++x) {
    for (int y = 1; y < h; ++y) {
      const int above = colDist(y - 1, x);
      if (above != kNoSeed && above + 1 < colDist(y, x)) colDist(y, x) = above + 1;
    }
    for (int y = h - 2; y >= 0; --y) {
      const int below = colDist(y + 1, x);
      if (below != kNoSeed && below + 1 < colDist(y, x)) colDist(y, x) = below + 1;
    }
  }

  // Pass 2: per row, lower envelope of the parabolas
  // x' -> colDist(y, x')^2 + (x - x')^2 over columns that have a seed.
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> v(static_cast<std::size_t>(w));      // envelope parabola columns
  std::vector<double> z(static_cast<std::size_t>(w) + 1);  // envelope boundaries
  std::vector<double> f(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    int k = -1;
    for (int q = 0; q < w; ++q) {
      const int d = colDist(y, q);
      if (d == kNoSeed) continue;
      const double fq = double(d) * d;
      double s = 0.0;
      while (k >= 0) {
        s = ((fq + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
            (2.0 * (q - v[k]));
        if (s <= z[k]) {
          --k;
        } else {
          break;
        }
      }
      if (k < 0) {
        k = 0;
        v[0] = q;
        z[0] = -kInf;
      } else {
        ++k;
        v[k] = q;
        z[k] = s;
      }
      z[k + 1] = kInf;
      f[q] = fq;
    }
    // At least one column has a seed, so the envelope is never empty.
    int j = 0;
    for (int x = 0; x < w; ++x) {
      while (z[j + 1] < x) ++j;
      const double dx = double(x) - v[j];
      out(y, x) = std::sqrt(dx * dx + f[v[j]]);
    }
  }
  return out;
}

DenseMap distance_transform_bruteforce(const PointSet& annotations) {
  require_grid(annotations);
  const int w = annotations.width, h = annotations.height;
  DenseMap out(h, w);

  const std::vector<Eigen::Vector2i> seeds = rounded_seeds(annotations);
  if (seeds.empty()) {
    out.setConstant(empty_set_distance(w, h));
    return out;
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : seeds) {
        const double dx = double(x) - s.x();
        const double dy = double(y) - s.y();
        best = std::min(best, dx * dx + dy * dy);
      }
      out(y, x) = std::sqrt(best);
    }
  }
  return out;
}

}  // namespace fidt
