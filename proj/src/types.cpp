#include "fidt/types.hpp"

#include <algorithm>
#include <cmath>

namespace fidt {

void validate(const PointSet& ps) {
  if (ps.width < 0 || ps.height < 0)
    throw InvalidArgument("PointSet: negative image dimensions");
  for (Eigen::Index i = 0; i < ps.points.cols(); ++i) {
    const double x = ps.points(0, i), y = ps.points(1, i);
    if (!std::isfinite(x) || !std::isfinite(y))
      throw InvalidArgument("PointSet: non-finite coordinate at index " + std::to_string(i));
    if (x < 0.0 || x >= ps.width || y < 0.0 || y >= ps.height)
      throw InvalidArgument("PointSet: point " + std::to_string(i) + " (" +
                            std::to_string(x) + ", " + std::to_string(y) +
                            ") outside the " + std::to_string(ps.width) + "x" +
                            std::to_string(ps.height) + " grid");
  }
  if (ps.boxes) {
    if (ps.boxes->cols() != ps.points.cols())
      throw InvalidArgument("PointSet: boxes/points length mismatch (" +
                            std::to_string(ps.boxes->cols()) + " vs " +
                            std::to_string(ps.points.cols()) + ")");
    for (Eigen::Index i = 0; i < ps.boxes->cols(); ++i) {
      const double w = (*ps.boxes)(0, i), h = (*ps.boxes)(1, i);
      if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(w) || !std::isfinite(h))
        throw InvalidArgument("PointSet: box " + std::to_string(i) +
                              " must have positive finite extents");
    }
  }
}

Eigen::Vector2i round_to_pixel(double x, double y, int width, int height) {
  auto clamp = [](long v, int hi) {
    return static_cast<int>(std::clamp<long>(v, 0, hi > 0 ? hi - 1 : 0));
  };
  return {clamp(std::lround(x), width), clamp(std::lround(y), height)};
}

}  // namespace fidt
