#pragma once

#include "fidt/types.hpp"

#include <algorithm>
#include <vector>

namespace fidt {

struct LmdsParams {
  double threshold_ratio = 100.0 / 255.0;  // adaptive threshold = ratio * max(candidates)
  double negative_cutoff = 0.10;           // maxima below this mark a negative sample
  int pool_size = 3;                       // odd, >= 3
  bool dedup_plateaus = false;             // keep one pixel per equal-valued plateau
};

void validate(const LmdsParams& params);

// Coordinates and count extracted from one map.
struct DetectionResult {
  std::vector<Eigen::Vector2i> coordinates;  // (x, y), row-major order
  int count = 0;
  bool is_negative = false;
  double max_value = 0.0;  // maximum of the candidate-maxima matrix
};

// Sliding pool_size x pool_size maximum, stride 1, window clipped at the
// borders (replicate padding). Separable two-pass.
template <typename Scalar>
DenseMapT<Scalar> max_filter(const DenseMapT<Scalar>& map, int pool_size) {
  if (pool_size < 1 || pool_size % 2 == 0)
    throw InvalidArgument("max_filter: pool_size must be odd and >= 1");
  const Eigen::Index rows = map.rows(), cols = map.cols();
  const Eigen::Index radius = pool_size / 2;
  DenseMapT<Scalar> tmp(rows, cols), out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, c - radius);
      const Eigen::Index hi = std::min(cols - 1, c + radius);
      Scalar m = map(r, lo);
      for (Eigen::Index cc = lo + 1; cc <= hi; ++cc) m = std::max(m, map(r, cc));
      tmp(r, c) = m;
    }
  }
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, r - radius);
      const Eigen::Index hi = std::min(rows - 1, r + radius);
      Scalar m = tmp(lo, c);
      for (Eigen::Index rr = lo + 1; rr <= hi; ++rr) m = std::max(m, tmp(rr, c));
      out(r, c) = m;
    }
  }
  return out;
}

// Local maxima detection: max-filter equality mask, negative-sample cutoff,
// adaptive threshold, survivors reported in row-major order.
DetectionResult detect(const DenseMap& map, const LmdsParams& params = {});

// detect(...).count.
int count(const DenseMap& map, const LmdsParams& params = {});

}  // namespace fidt
