#pragma once

#include "fidt/types.hpp"

#include <cmath>
#include <vector>

namespace fidt {

struct FidtParams {
  double alpha = 0.02;
  double beta  = 0.75;
  double c     = 1.0;
};

// alpha >= 0, beta > 0, c > 0. (alpha, beta) = (0, 1) degenerates to the
// plain inverse transform.
void validate(const FidtParams& params);

template <typename Scalar>
Scalar idt_value(Scalar distance, Scalar c) {
  return Scalar(1) / (distance + c);
}

// 1 / (P^(alpha*P + beta) + c). P = 0 maps to exactly 1/c (0^anything taken
// as 0 so the annotated pixel is the peak). With (alpha, beta) = (0, 1) the
// exponent is exactly 1 and std::pow(P, 1) == P, so the result is
// bit-identical to idt_value.
template <typename Scalar>
Scalar fidt_value(Scalar distance, const FidtParams& params) {
  const Scalar c = static_cast<Scalar>(params.c);
  if (distance == Scalar(0)) return Scalar(1) / c;
  const Scalar exponent =
      static_cast<Scalar>(params.alpha) * distance + static_cast<Scalar>(params.beta);
  return Scalar(1) / (std::pow(distance, exponent) + c);
}

namespace detail {

template <typename Derived>
void require_distance_map(const Eigen::ArrayBase<Derived>& distance, const char* op) {
  const auto& d = distance.derived();
  if (!d.allFinite() || (d < typename Derived::Scalar(0)).any())
    throw InvalidArgument(std::string(op) + ": distance entries must be finite and >= 0");
}

}  // namespace detail

// Pixelwise 1 / (P + c); range (0, 1/c].
template <typename Derived>
DenseMapT<typename Derived::Scalar> idt_map(const Eigen::ArrayBase<Derived>& distance,
                                            double c = 1.0) {
  using Scalar = typename Derived::Scalar;
  if (!(c > 0.0)) throw InvalidArgument("idt_map: c must be > 0");
  detail::require_distance_map(distance, "idt_map");
  const Scalar cs = static_cast<Scalar>(c);
  return distance.derived().unaryExpr([cs](Scalar p) { return idt_value(p, cs); });
}

// Pixelwise focal inverse transform; range (0, 1/c], monotonically
// non-increasing in the distance for the default parameters.
template <typename Derived>
DenseMapT<typename Derived::Scalar> fidt_map(const Eigen::ArrayBase<Derived>& distance,
                                             const FidtParams& params = {}) {
  using Scalar = typename Derived::Scalar;
  validate(params);
  detail::require_distance_map(distance, "fidt_map");
  return distance.derived().unaryExpr(
      [&params](Scalar p) { return fidt_value(p, params); });
}

struct ProfilePoint {
  double distance;
  double fidt;
  double idt;
};

// Tabulates both transforms along a 1-D distance axis, samples at
// 0, step, 2*step, ... while <= max_distance.
std::vector<ProfilePoint> fidt_profile(const FidtParams& params, double max_distance,
                                       double step);

}  // namespace fidt
