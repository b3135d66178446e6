#pragma once

#include "fidt/types.hpp"

#include <optional>

namespace fidt {

struct SsimParams {
  double lambda1 = 0.0001;
  double lambda2 = 0.0009;
  int window = 30;  // instance window side length, >= 2
};

void validate(const SsimParams& params);

struct LossReport {
  double mse = 0.0;
  std::optional<double> issim;     // absent for negative samples (N = 0)
  double total = 0.0;              // mse + issim (when present)
  std::optional<DenseMap> gradient;  // d(total)/dE, per pixel
};

// Mean over all pixels of (E - G)^2.
double mse_loss(const DenseMap& estimated, const DenseMap& truth);

// Structural similarity with scalar statistics over the whole patch pair
// (population variance, divisor = pixel count). Result in [-1, 1].
double ssim(const DenseMap& estimated_patch, const DenseMap& truth_patch,
            const SsimParams& params = {});

// Mean of 1 - SSIM over per-annotation window x window regions centered on
// the rounded points, clipped at the borders. Result in [0, 2]. Requires at
// least one annotation.
double issim_loss(const DenseMap& estimated, const DenseMap& truth,
                  const PointSet& annotations, const SsimParams& params = {});

// mse + issim, with the I-SSIM term skipped for negative samples. When
// want_gradient, also the analytic gradient of the total with respect to
// every estimated pixel (overlapping instance windows accumulate).
LossReport total_loss(const DenseMap& estimated, const DenseMap& truth,
                      const PointSet& annotations, const SsimParams& params = {},
                      bool want_gradient = false);

// Central finite differences of the total loss, step h per pixel. When
// max_pixels > 0 and the map is larger, only a deterministic stride sample of
// pixels is evaluated; the rest are NaN. Slow; meant for gradient checks.
DenseMap finite_difference_gradient(const DenseMap& estimated, const DenseMap& truth,
                                    const PointSet& annotations,
                                    const SsimParams& params = {}, double h = 1e-4,
                                    Eigen::Index max_pixels = 0);

}  // namespace fidt
