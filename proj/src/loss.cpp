#include "fidt/loss.hpp"

#include <cmath>
#include <limits>

namespace fidt {

void validate(const SsimParams& params) {
  if (!(params.lambda1 > 0.0)) throw InvalidArgument("SsimParams: lambda1 must be > 0");
  if (!(params.lambda2 > 0.0)) throw InvalidArgument("SsimParams: lambda2 must be > 0");
  if (params.window < 2) throw InvalidArgument("SsimParams: window must be >= 2");
}

namespace {

struct Rect {
  Eigen::Index x0, y0, x1, y1;  // inclusive
  Eigen::Index pixels() const { return (x1 - x0 + 1) * (y1 - y0 + 1); }
};

// window x window box centered on the rounded annotation, clipped at the
// image borders.
Rect instance_window(double px, double py, int window, Eigen::Index rows,
                     Eigen::Index cols) {
  const Eigen::Vector2i c =
      round_to_pixel(px, py, static_cast<int>(cols), static_cast<int>(rows));
  Rect r;
  r.x0 = std::max<Eigen::Index>(0, c.x() - window / 2);
  r.y0 = std::max<Eigen::Index>(0, c.y() - window / 2);
  r.x1 = std::min<Eigen::Index>(cols - 1, c.x() - window / 2 + window - 1);
  r.y1 = std::min<Eigen::Index>(rows - 1, c.y() - window / 2 + window - 1);
  return r;
}

struct RegionStats {
  double muE, muG, varE, varG, cov;  // population convention
  Eigen::Index n;
};

RegionStats region_stats(const DenseMap& estimated, const DenseMap& truth, const Rect& r) {
  RegionStats s{0, 0, 0, 0, 0, r.pixels()};
  for (Eigen::Index y = r.y0; y <= r.y1; ++y)
    for (Eigen::Index x = r.x0; x <= r.x1; ++x) {
      s.muE += estimated(y, x);
      s.muG += truth(y, x);
    }
  s.muE /= double(s.n);
  s.muG /= double(s.n);
  for (Eigen::Index y = r.y0; y <= r.y1; ++y)
    for (Eigen::Index x = r.x0; x <= r.x1; ++x) {
      const double de = estimated(y, x) - s.muE;
      const double dg = truth(y, x) - s.muG;
      s.varE += de * de;
      s.varG += dg * dg;
      s.cov += de * dg;
    }
  s.varE /= double(s.n);
  s.varG /= double(s.n);
  s.cov /= double(s.n);
  return s;
}

double ssim_from_stats(const RegionStats& s, const SsimParams& p) {
  const double a1 = 2.0 * s.muE * s.muG + p.lambda1;
  const double a2 = 2.0 * s.cov + p.lambda2;
  const double b1 = s.muE * s.muE + s.muG * s.muG + p.lambda1;
  const double b2 = s.varE + s.varG + p.lambda2;
  return (a1 * a2) / (b1 * b2);
}

// d(SSIM)/dE_i through the scalar statistics:
//   dSSIM/dE_i = 2/(n*b1*b2) * (a2*muG + a1*(G_i - muG)
//                               - SSIM*(b2*muE + b1*(E_i - muE)))
// Accumulates `weight * d(1 - SSIM)/dE_i` into grad.
void accumulate_issim_gradient(const DenseMap& estimated, const DenseMap& truth,
                               const Rect& r, const SsimParams& p, double weight,
                               DenseMap& grad) {
  const RegionStats s = region_stats(estimated, truth, r);
  const double a1 = 2.0 * s.muE * s.muG + p.lambda1;
  const double a2 = 2.0 * s.cov + p.lambda2;
  const double b1 = s.muE * s.muE + s.muG * s.muG + p.lambda1;
  const double b2 = s.varE + s.varG + p.lambda2;
  const double ssim = (a1 * a2) / (b1 * b2);
  const double scale = 2.0 / (double(s.n) * b1 * b2);
  for (Eigen::Index y = r.y0; y <= r.y1; ++y)
    for (Eigen::Index x = r.x0; x <= r.x1; ++x) {
      const double dssim =
          scale * (a2 * s.muG + a1 * (truth(y, x) - s.muG) -
                   ssim * (b2 * s.muE + b1 * (estimated(y, x) - s.muE)));
      grad(y, x) += weight * (-dssim);
    }
}

void require_same_shape(const DenseMap& a, const DenseMap& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(op) + ": map dimensions differ (" +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
}

void require_annotations(const DenseMap& map, const PointSet& annotations) {
  validate(annotations);
  if (annotations.width != map.cols() || annotations.height != map.rows())
    throw InvalidArgument("issim_loss: annotation grid does not match the maps");
}

}  // namespace

double mse_loss(const DenseMap& estimated, const DenseMap& truth) {
  require_same_shape(estimated, truth, "mse_loss");
  if (estimated.size() == 0) throw InvalidArgument("mse_loss: empty maps");
  return (estimated - truth).square().sum() / double(estimated.size());
}

double ssim(const DenseMap& estimated_patch, const DenseMap& truth_patch,
            const SsimParams& params) {
  validate(params);
  require_same_shape(estimated_patch, truth_patch, "ssim");
  if (estimated_patch.size() < 2)
    throw InvalidArgument("ssim: patch must have at least 2 pixels");
  const Rect whole{0, 0, estimated_patch.cols() - 1, estimated_patch.rows() - 1};
  return ssim_from_stats(region_stats(estimated_patch, truth_patch, whole), params);
}

double issim_loss(const DenseMap& estimated, const DenseMap& truth,
                  const PointSet& annotations, const SsimParams& params) {
  validate(params);
  require_same_shape(estimated, truth, "issim_loss");
  require_annotations(estimated, annotations);
  const Eigen::Index n = annotations.size();
  if (n == 0)
    throw InvalidArgument("issim_loss: undefined for zero annotations (negative sample)");

  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Rect r = instance_window(annotations.points(0, i), annotations.points(1, i),
                                   params.window, estimated.rows(), estimated.cols());
    acc += 1.0 - ssim_from_stats(region_stats(estimated, truth, r), params);
  }
  return acc / double(n);
}

LossReport total_loss(const DenseMap& estimated, const DenseMap& truth,
                      const PointSet& annotations, const SsimParams& params,
                      bool want_gradient) {
  validate(params);
  require_same_shape(estimated, truth, "total_loss");
  require_annotations(estimated, annotations);

  LossReport report;
  report.mse = mse_loss(estimated, truth);
  const Eigen::Index n = annotations.size();
  if (n > 0) report.issim = issim_loss(estimated, truth, annotations, params);
  report.total = report.mse + report.issim.value_or(0.0);

  if (want_gradient) {
    DenseMap grad = 2.0 * (estimated - truth) / double(estimated.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Rect r = instance_window(annotations.points(0, i), annotations.points(1, i),
                                     params.window, estimated.rows(), estimated.cols());
      accumulate_issim_gradient(estimated, truth, r, params, 1.0 / double(n), grad);
    }
    report.gradient = std::move(grad);
  }
  return report;
}

DenseMap finite_difference_gradient(const DenseMap& estimated, const DenseMap& truth,
                                    const PointSet& annotations, const SsimParams& params,
                                    double h, Eigen::Index max_pixels) {
  if (!(h > 0.0)) throw InvalidArgument("finite_difference_gradient: step must be > 0");
  auto loss_at = [&](const DenseMap& e) {
    return total_loss(e, truth, annotations, params, false).total;
  };
  DenseMap fd(estimated.rows(), estimated.cols());
  fd.setConstant(std::numeric_limits<double>::quiet_NaN());
  Eigen::Index stride = 1;
  if (max_pixels > 0 && estimated.size() > max_pixels)
    stride = (estimated.size() + max_pixels - 1) / max_pixels;
  DenseMap work = estimated;
  for (Eigen::Index i = 0; i < estimated.size(); i += stride) {
    const Eigen::Index y = i / estimated.cols(), x = i % estimated.cols();
    const double original = work(y, x);
    work(y, x) = original + h;
    const double up = loss_at(work);
    work(y, x) = original - h;
    const double down = loss_at(work);
    work(y, x) = original;
    fd(y, x) = (up - down) / (2.0 * h);
  }
  return fd;
}

}  // namespace fidt
