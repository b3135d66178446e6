#pragma once

#include "fidt/types.hpp"

#include <vector>

namespace fidt {

// Distance assigned to every pixel when the annotation set is empty: the grid
// diagonal, the largest distance the grid can realize.
double empty_set_distance(int width, int height);

// Annotation points rounded to pixels, duplicates removed (first occurrence
// wins, input order preserved).
std::vector<Eigen::Vector2i> rounded_seeds(const PointSet& annotations);

// Exact Euclidean distance to the nearest annotation, per pixel. Two-pass
// separable lower-envelope transform over squared distances, then a square
// root. Linear in the pixel count.
DenseMap distance_transform(const PointSet& annotations);

// Direct per-pixel scan over all annotation points, O(H*W*N). Reference
// implementation the fast transform is tested against; use on small grids.
DenseMap distance_transform_bruteforce(const PointSet& annotations);

}  // namespace fidt
