#pragma once

#include "fidt/types.hpp"

#include <Eigen/Geometry>

#include <vector>

namespace fidt {

struct BoxParams {
  int k = 4;                   // neighbor count
  double f = 0.1;              // scale factor on the mean neighbor distance
  double cap_fraction = 0.05;  // cap = cap_fraction * min(image_width, image_height)
};

void validate(const BoxParams& params);

// Square box of side `size` centered on `center`.
struct PseudoBox {
  Eigen::Vector2d center;
  double size = 0.0;

  // Corner rectangle (x0, y0, x1, y1) intersected with the image bounds.
  Eigen::AlignedBox2d clipped(int image_width, int image_height) const;
};

// Mean distance from each point to its k nearest neighbors among the other
// points; exact. Points with no neighbor (a lone point) yield -1. When fewer
// than k neighbors exist the mean runs over all of them.
std::vector<double> knn_mean_distances(const PointMatrix& points, int k);

// Pseudo box sizes from KNN distances: s = min(f * mean_knn_distance,
// cap_fraction * min(w, h)); a lone point falls back to the cap. Output
// parallels the input points.
std::vector<PseudoBox> generate_boxes(const PointSet& points, const BoxParams& params = {});

}  // namespace fidt
