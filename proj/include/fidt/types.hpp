#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>

namespace fidt {

// Single-channel H x W grid of real values. Row-major so that the raw buffer
// matches the on-disk layout (top row first). Internal computation uses the
// double instantiation; files store float32.
template <typename Scalar>
using DenseMapT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using DenseMap  = DenseMapT<double>;
using DenseMapF = DenseMapT<float>;

// One point per column: row 0 = x (column), row 1 = y (row).
// Origin at the top-left pixel.
using PointMatrix = Eigen::Matrix<double, 2, Eigen::Dynamic>;

// Annotated or predicted head coordinates for one image. `boxes` carries
// per-point ground-truth extents (w, h), parallel to `points`, when known.
struct PointSet {
  int width  = 0;
  int height = 0;
  PointMatrix points;
  std::optional<PointMatrix> boxes;

  Eigen::Index size() const { return points.cols(); }
  bool empty() const { return points.cols() == 0; }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or parameter constraint.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Stream/file access failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. `where` is a byte offset for binary sources and a
// 1-based line number for text sources.
class FormatError : public IoError {
 public:
  FormatError(const std::string& source, long long where, const std::string& what)
      : IoError(source + ":" + std::to_string(where) + ": " + what),
        source_(source),
        where_(where) {}

  const std::string& source() const { return source_; }
  long long where() const { return where_; }

 private:
  std::string source_;
  long long where_;
};

// Throws InvalidArgument unless all points lie in [0, width) x [0, height),
// coordinates are finite, and boxes (if present) parallel the points with
// strictly positive extents.
void validate(const PointSet& ps);

// Nearest-pixel rounding (ties away from zero), clamped to the grid so that
// coordinates just below the upper bound land on the boundary pixel.
Eigen::Vector2i round_to_pixel(double x, double y, int width, int height);

}  // namespace fidt
