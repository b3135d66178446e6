#include "fidt/fidt_transform.hpp"

namespace fidt {

void validate(const FidtParams& params) {
  if (!(params.c > 0.0)) throw InvalidArgument("FidtParams: c must be > 0");
  if (!(params.alpha >= 0.0)) throw InvalidArgument("FidtParams: alpha must be >= 0");
  if (!(params.beta > 0.0)) throw InvalidArgument("FidtParams: beta must be > 0");
}

std::vector<ProfilePoint> fidt_profile(const FidtParams& params, double max_distance,
                                       double step) {
  validate(params);
  if (!(max_distance > 0.0)) throw InvalidArgument("fidt_profile: max_distance must be > 0");
  if (!(step > 0.0)) throw InvalidArgument("fidt_profile: step must be > 0");

  std::vector<ProfilePoint> rows;
  rows.reserve(static_cast<std::size_t>(max_distance / step) + 2);
  for (long i = 0;; ++i) {
    const double d = double(i) * step;
    if (d > max_distance) break;
    rows.push_back({d, fidt_value(d, params), idt_value(d, params.c)});
  }
  return rows;
}

}  // namespace fidt
